"""Double-oracle solving of the full prediction games.

The exponentially large game is never materialized. Both players start from
small strategy sets; each round solves the restricted matrix game exactly,
asks each player's best-response oracle whether a pure strategy beats the
restricted equilibrium by more than the tolerance, and adds any that does.
When neither player can improve and the oracles are exact, the restricted
equilibrium is an equilibrium of the full game: the two best-response
values bracket the full game value, so the certified gap is at most twice
the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .br_bipartite import CostFunction, matching_score
from .core import (
    LabelSequence,
    MixedStrategy,
    PotentialTable,
    aer_score,
    f1_score,
    lagrangian,
)
from .errors import InvalidInputError
from .matrixgame import solve_zero_sum

SCORE_KINDS = ("f1", "aer", "bipartite")

_LP_TOL = 1e-8
_TIGHT_LP_TOL = 1e-11


class BestResponseOracle(Protocol):
    """Per-player argmax/argmin of the net payoff against a fixed opponent mix.

    Returned values must equal the expected net payoff of the returned
    sequence against the given mixture, so they are directly comparable to
    restricted game values.
    """

    exact: bool

    def predictor_br(
        self, adversary_mix: MixedStrategy, psi: PotentialTable
    ) -> tuple[LabelSequence, float]: ...

    def adversary_br(
        self, predictor_mix: MixedStrategy, psi: PotentialTable
    ) -> tuple[LabelSequence, float]: ...


@dataclass(frozen=True)
class OracleGameConfig:
    """One game instance: score kind, potentials, and loop controls."""

    score_kind: str
    psi: PotentialTable
    initial_predictor: tuple[LabelSequence, ...]
    initial_adversary: tuple[LabelSequence, ...]
    target: int | None = None
    cost: CostFunction | None = None
    convergence_tol: float = 1e-6
    max_iterations: int = 500

    def __post_init__(self):
        if self.score_kind not in SCORE_KINDS:
            raise InvalidInputError(f"unknown score kind: {self.score_kind!r}")
        if self.convergence_tol <= 0.0:
            raise InvalidInputError("convergence tolerance must be positive")
        if self.max_iterations < 1:
            raise InvalidInputError("iteration cap must be at least 1")
        if not self.initial_predictor or not self.initial_adversary:
            raise InvalidInputError("both players need a non-empty initial strategy set")
        if self.score_kind == "f1" and self.target is None:
            raise InvalidInputError("the F1 game needs a target class")
        if self.score_kind == "bipartite" and self.cost is None:
            raise InvalidInputError("the matching game needs a cost function")


def payoff_entry(pred: LabelSequence, adv: LabelSequence, cfg: OracleGameConfig) -> float:
    """Net payoff of a pure strategy pair: score minus the adversary's potential."""
    if cfg.score_kind == "f1":
        score = f1_score(pred, adv, cfg.target)
    elif cfg.score_kind == "aer":
        score = 1.0 - aer_score(pred, adv)
    else:
        score = matching_score(pred, adv, cfg.cost)
    return score - lagrangian(adv, cfg.psi)


@dataclass
class GameSolution:
    """Mixed equilibrium of the full game plus certification bookkeeping."""

    predictor_mix: MixedStrategy
    adversary_mix: MixedStrategy
    value: float
    gap: float
    certified: bool
    iterations: int


def _dedup(seqs: Sequence[LabelSequence]) -> list[LabelSequence]:
    out: list[LabelSequence] = []
    seen: set[tuple[int, ...]] = set()
    for seq in seqs:
        if seq.tags not in seen:
            seen.add(seq.tags)
            out.append(seq)
    return out


def run_double_oracle(cfg: OracleGameConfig, oracle: BestResponseOracle) -> GameSolution:
    """Grow strategy sets by best responses until no deviation beats the tolerance.

    Hits of the iteration cap, inexact oracles, and unresolved numerical
    drift (a duplicate best response that still claims an improvement after
    one tightened re-solve) all leave the result uncertified.
    """
    pred_set = _dedup(cfg.initial_predictor)
    adv_set = _dedup(cfg.initial_adversary)
    matrix = np.array([[payoff_entry(p, a, cfg) for a in adv_set] for p in pred_set])
    tol = cfg.convergence_tol

    lp_tol = _LP_TOL
    tightened = False
    solution: GameSolution | None = None
    for iteration in range(1, cfg.max_iterations + 1):
        eq = solve_zero_sum(matrix, lp_tol)
        predictor_mix = MixedStrategy.normalized(pred_set, eq.row_mix)
        adversary_mix = MixedStrategy.normalized(adv_set, eq.col_mix)
        br_pred, val_pred = oracle.predictor_br(adversary_mix, cfg.psi)
        br_adv, val_adv = oracle.adversary_br(predictor_mix, cfg.psi)
        solution = GameSolution(
            predictor_mix=predictor_mix,
            adversary_mix=adversary_mix,
            value=eq.value,
            gap=max(0.0, val_pred - val_adv),
            certified=False,
            iterations=iteration,
        )

        grew = False
        drift = False
        if val_pred > eq.value + tol:
            if any(br_pred.tags == s.tags for s in pred_set):
                drift = True
            else:
                pred_set.append(br_pred)
                row = [payoff_entry(br_pred, a, cfg) for a in adv_set]
                matrix = np.vstack([matrix, np.asarray(row)[None, :]])
                grew = True
        if val_adv < eq.value - tol:
            if any(br_adv.tags == s.tags for s in adv_set):
                drift = True
            else:
                adv_set.append(br_adv)
                col = [payoff_entry(p, br_adv, cfg) for p in pred_set]
                matrix = np.hstack([matrix, np.asarray(col)[:, None]])
                grew = True

        if grew:
            continue
        if drift:
            if not tightened:
                tightened = True
                lp_tol = _TIGHT_LP_TOL
                continue
            return solution  # drift persisted; report the incumbent uncertified
        solution.certified = bool(oracle.exact)
        return solution

    assert solution is not None
    return solution
