"""Adversarial structured prediction via zero-sum games.

Sequence and alignment predictors trained against an adversary that
approximates the data while the predictor optimizes the exact evaluation
measure (per-class F1, alignment error rate, or matching cost). Games are
solved by double-oracle constraint generation around an exact LP solver.
"""

__version__ = "0.1.0"
