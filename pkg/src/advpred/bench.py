"""Wall-time comparison of exact versus approximate best responses.

Builds one seeded chain F1 game per requested length, solves it with
double oracle under each best-response mode, and reports times, iteration
counts, and values as a plot-ready table. Times are wall-clock; everything
else is deterministic for a fixed seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .br_fscore import F1Oracle
from .core import LabelSequence, MixedStrategy, TagAlphabet
from .double_oracle import OracleGameConfig, run_double_oracle
from .selftest import _random_chain_psi, _random_mix


@dataclass(frozen=True)
class BenchRow:
    n: int
    exact_seconds: float
    approx_seconds: float
    exact_iterations: int
    approx_iterations: int
    exact_value: float
    approx_value: float


def _timed_solve(cfg: OracleGameConfig, oracle: F1Oracle) -> tuple[float, int, float]:
    start = time.perf_counter()
    solution = run_double_oracle(cfg, oracle)
    return time.perf_counter() - start, solution.iterations, solution.value


def run_bench(
    lengths: list[int],
    *,
    seed: int = 0,
    m: int = 2,
    psi_scale: float = 0.25,
    tol: float = 1e-6,
    max_iterations: int = 200,
) -> list[BenchRow]:
    alphabet = TagAlphabet(tuple(f"K{i}" for i in range(m)))
    target = m - 1
    filler = 0
    rows = []
    for n in lengths:
        rng = np.random.default_rng((seed, n))
        psi = _random_chain_psi(n, m, rng, scale=psi_scale)
        start = LabelSequence((filler,) * n, alphabet)
        # Seed the adversary with a mildly structured strategy so both modes
        # face the same non-trivial game.
        adv0 = _random_mix(alphabet, n, rng, max_support=1).support[0]
        cfg = OracleGameConfig(
            "f1",
            psi,
            (start,),
            (adv0,),
            target=target,
            convergence_tol=tol,
            max_iterations=max_iterations,
        )
        exact_s, exact_it, exact_v = _timed_solve(cfg, F1Oracle(target, "exact"))
        approx_s, approx_it, approx_v = _timed_solve(cfg, F1Oracle(target, "approximate"))
        rows.append(BenchRow(n, exact_s, approx_s, exact_it, approx_it, exact_v, approx_v))
    return rows


def format_bench(rows: list[BenchRow]) -> str:
    lines = ["n\texact_seconds\tapprox_seconds\texact_iterations\tapprox_iterations"]
    for row in rows:
        lines.append(
            f"{row.n}\t{row.exact_seconds:.4f}\t{row.approx_seconds:.4f}"
            f"\t{row.exact_iterations}\t{row.approx_iterations}"
        )
    return "\n".join(lines) + "\n"
