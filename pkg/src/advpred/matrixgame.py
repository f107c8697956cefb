"""Exact zero-sum matrix game solving by linear programming.

Convention: rows belong to the maximizing player, columns to the minimizer.
The solver shifts the matrix positive and solves the classic scaled LP

    maximize 1'w   subject to   (M + shift) w <= 1,  w >= 0,

whose optimum V gives the shifted game value 1/V, the column mix w/V, and
the row mix from the constraint duals. A dense primal simplex with Bland's
pivoting rule is enough here: restricted games stay small (typically well
under 100x100), and Bland's rule guarantees termination under degeneracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SolverFailureError

#: Default certification tolerance for equilibria.
DEFAULT_TOL = 1e-9

_PIVOT_EPS = 1e-11


@dataclass(frozen=True)
class Equilibrium:
    """A mixed-strategy pair with the game value and residual deviation gap."""

    row_mix: np.ndarray
    col_mix: np.ndarray
    value: float
    gap: float


def best_pure_row(matrix: np.ndarray, col_mix: np.ndarray) -> tuple[int, float]:
    """Best pure row against a column mix; ties go to the lowest index."""
    m = np.asarray(matrix, dtype=float)
    q = np.asarray(col_mix, dtype=float)
    if m.ndim != 2 or q.shape != (m.shape[1],):
        raise InvalidInputError("column mix length must equal the column count")
    payoffs = m @ q
    r = int(np.argmax(payoffs))
    return r, float(payoffs[r])


def best_pure_col(matrix: np.ndarray, row_mix: np.ndarray) -> tuple[int, float]:
    """Best pure column (minimizer) against a row mix; ties go to the lowest index."""
    m = np.asarray(matrix, dtype=float)
    p = np.asarray(row_mix, dtype=float)
    if m.ndim != 2 or p.shape != (m.shape[0],):
        raise InvalidInputError("row mix length must equal the row count")
    payoffs = p @ m
    c = int(np.argmin(payoffs))
    return c, float(payoffs[c])


def deviation_gap(matrix: np.ndarray, row_mix: np.ndarray, col_mix: np.ndarray, value: float) -> float:
    """Sum of both players' best deviation gains against the given mixes."""
    _, row_best = best_pure_row(matrix, col_mix)
    _, col_best = best_pure_col(matrix, row_mix)
    return max(0.0, row_best - value) + max(0.0, value - col_best)


def solve_zero_sum(matrix: np.ndarray, tol: float = DEFAULT_TOL, max_pivots: int = 100_000) -> Equilibrium:
    """Solve a finite zero-sum game exactly (up to ``tol``) by dense simplex."""
    if tol <= 0.0:
        raise InvalidInputError("tolerance must be positive")
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise InvalidInputError("payoff matrix must be a non-empty 2-D array")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("payoff matrix entries must be finite")

    rows, cols = m.shape
    shift = max(0.0, 1.0 - float(m.min()))
    shifted = m + shift  # every entry >= 1, so the scaled LP is bounded

    w, duals = _simplex_game(shifted, max_pivots)
    total = float(w.sum())
    inv_value = 1.0 / total
    value = inv_value - shift
    col_mix = w * inv_value
    row_mix = duals * inv_value
    # Strong duality makes both sides sum to the LP optimum; renormalize the
    # residual float error so downstream strategy objects validate cleanly.
    row_mix = np.maximum(row_mix, 0.0)
    row_mix /= row_mix.sum()
    col_mix = np.maximum(col_mix, 0.0)
    col_mix /= col_mix.sum()

    gap = deviation_gap(m, row_mix, col_mix, value)
    if gap > tol:
        raise SolverFailureError(
            f"simplex equilibrium misses tolerance: gap {gap!r} > {tol!r}",
            incumbent=Equilibrium(row_mix, col_mix, value, gap),
        )
    return Equilibrium(row_mix, col_mix, value, gap)


def _pivot_until_flat(t: np.ndarray, basis: list[int], max_pivots: int) -> int:
    """Run primal pivots with Bland's rule until the tableau looks optimal.

    Ratio-test comparisons are exact: Bland's rule needs true ties, and a
    fuzzed minimum can pivot the tableau infeasible. Returns pivots used.
    """
    rows = t.shape[0] - 1
    width = t.shape[1] - 1
    for pivot in range(max_pivots + 1):
        reduced = t[0, :-1]
        # Bland's rule: lowest-index improving column enters.
        entering = -1
        for j in range(width):
            if reduced[j] > _PIVOT_EPS:
                entering = j
                break
        if entering < 0:
            return pivot
        col = t[1:, entering]
        rhs = t[1:, -1]
        best_ratio = np.inf
        leaving = -1
        for i in range(rows):
            if col[i] > _PIVOT_EPS:
                ratio = rhs[i] / col[i]
                # Ties resolved by the smallest basic variable index (Bland).
                if ratio < best_ratio or (ratio == best_ratio and basis[i] < basis[leaving]):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            raise SolverFailureError("game LP is unbounded; matrix shift failed")
        pivot_row = leaving + 1
        t[pivot_row] /= t[pivot_row, entering]
        for i in range(rows + 1):
            if i != pivot_row and t[i, entering] != 0.0:
                t[i] -= t[i, entering] * t[pivot_row]
        basis[leaving] = entering
    raise SolverFailureError(f"simplex pivot cap {max_pivots} exceeded")


def _simplex_game(a: np.ndarray, max_pivots: int) -> tuple[np.ndarray, np.ndarray]:
    """Maximize 1'w s.t. a w <= 1, w >= 0; return (w, constraint duals).

    The slack basis is feasible from the start, so no phase-1 is needed.
    Long pivot runs let round-off accumulate in the tableau, so after each
    apparent optimum the basis is refactorized against the original data;
    if the true reduced costs still show an improving column, pivoting
    resumes from the freshly rebuilt tableau.
    """
    rows, cols = a.shape
    full = np.hstack([a, np.eye(rows)])
    rhs = np.ones(rows)
    cost = np.zeros(cols + rows)
    cost[:cols] = 1.0
    basis = list(range(cols, cols + rows))

    budget = max_pivots
    for _ in range(50):
        basis_matrix = full[:, basis]
        body = np.linalg.solve(basis_matrix, full)
        basic_values = np.maximum(np.linalg.solve(basis_matrix, rhs), 0.0)
        duals = np.linalg.solve(basis_matrix.T, cost[basis])
        reduced = cost - duals @ full
        if reduced.max() <= _PIVOT_EPS:
            w = np.zeros(cols)
            for value, var in zip(basic_values, basis):
                if var < cols:
                    w[var] = value
            return w, np.maximum(duals, 0.0)
        t = np.empty((rows + 1, cols + rows + 1))
        t[0, :-1] = reduced
        t[0, -1] = -float(cost[basis] @ basic_values)
        t[1:, :-1] = body
        t[1:, -1] = basic_values
        budget -= _pivot_until_flat(t, basis, budget)
    raise SolverFailureError("simplex failed to verify optimality after repeated refactorization")
