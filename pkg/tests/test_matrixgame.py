import numpy as np
import pytest
from scipy.optimize import linprog

from advpred.errors import InvalidInputError
from advpred.matrixgame import best_pure_col, best_pure_row, deviation_gap, solve_zero_sum


def reference_value(matrix: np.ndarray) -> float:
    """Independent maximin LP via scipy's HiGHS solver."""
    rows, cols = matrix.shape
    c = np.zeros(rows + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-matrix.T, np.ones((cols, 1))])
    a_eq = np.ones((1, rows + 1))
    a_eq[0, -1] = 0.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(cols),
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * rows + [(None, None)],
        method="highs",
    )
    assert res.status == 0
    return -res.fun


def fictitious_play_value(matrix: np.ndarray, sweeps: int = 20000) -> float:
    """Second independent reference: averaged best-response dynamics."""
    rows, cols = matrix.shape
    row_counts = np.zeros(rows)
    col_counts = np.zeros(cols)
    row_counts[0] += 1
    col_counts[0] += 1
    lo, hi = -np.inf, np.inf
    for _ in range(sweeps):
        r = int(np.argmax(matrix @ col_counts))
        c = int(np.argmin(row_counts @ matrix))
        row_counts[r] += 1
        col_counts[c] += 1
        hi = min(hi, float((matrix @ col_counts).max() / col_counts.sum()))
        lo = max(lo, float((row_counts @ matrix).min() / row_counts.sum()))
    return (lo + hi) / 2.0


class TestSolveZeroSum:
    def test_matching_pennies(self):
        eq = solve_zero_sum(np.array([[1.0, -1.0], [-1.0, 1.0]]))
        assert eq.value == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(eq.row_mix, [0.5, 0.5])
        assert np.allclose(eq.col_mix, [0.5, 0.5])

    def test_dominant_row(self):
        eq = solve_zero_sum(np.array([[1.0, 1.0], [0.0, 0.0]]))
        assert eq.value == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(eq.row_mix, [1.0, 0.0])

    def test_degenerate_1x1(self):
        eq = solve_zero_sum(np.array([[-3.5]]))
        assert eq.value == pytest.approx(-3.5, abs=1e-12)

    def test_published_game_value_vs_independent_solvers(self):
        from advpred.core import AlignmentPotentials
        from advpred.oracle import exhaustive_equilibrium

        full = exhaustive_equilibrium("aer", AlignmentPotentials.zeros(2))
        assert full.matrix.shape == (4, 9)
        want = reference_value(full.matrix)
        assert full.value == pytest.approx(want, abs=1e-6)
        assert full.value == pytest.approx(fictitious_play_value(full.matrix), abs=2e-3)

    def test_random_matrices_vs_scipy(self, rng):
        for trial in range(60):
            r = int(rng.integers(1, 20))
            c = int(rng.integers(1, 20))
            m = rng.uniform(-5, 5, (r, c))
            if trial % 3 == 0:
                m = np.round(m, 1)  # force degenerate ties
            eq = solve_zero_sum(m, 1e-8)
            assert eq.value == pytest.approx(reference_value(m), abs=1e-7)
            assert eq.gap <= 1e-8

    def test_minimax_sanity(self, rng):
        for _ in range(40):
            m = rng.uniform(-2, 2, (int(rng.integers(1, 9)), int(rng.integers(1, 9))))
            eq = solve_zero_sum(m)
            assert m.min(axis=1).max() - 1e-9 <= eq.value <= m.max(axis=0).min() + 1e-9

    def test_scale_shift_support_equivariance(self, rng):
        for _ in range(25):
            m = rng.uniform(-1, 1, (int(rng.integers(2, 7)), int(rng.integers(2, 7))))
            a, b = float(rng.uniform(0.5, 3.0)), float(rng.uniform(-2.0, 2.0))
            eq1 = solve_zero_sum(m)
            eq2 = solve_zero_sum(a * m + b)
            assert eq2.value == pytest.approx(a * eq1.value + b, abs=1e-8)
            # equilibria may be non-unique; compare supports, not mixes
            assert set(np.nonzero(eq1.row_mix > 1e-9)[0]) == set(np.nonzero(eq2.row_mix > 1e-9)[0])
            assert set(np.nonzero(eq1.col_mix > 1e-9)[0]) == set(np.nonzero(eq2.col_mix > 1e-9)[0])

    def test_gap_consistent_with_deviations(self, rng):
        for _ in range(20):
            m = rng.uniform(-1, 1, (4, 5))
            eq = solve_zero_sum(m)
            assert eq.gap == pytest.approx(deviation_gap(m, eq.row_mix, eq.col_mix, eq.value), abs=1e-15)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidInputError):
            solve_zero_sum(np.array([[np.nan, 1.0]]))
        with pytest.raises(InvalidInputError):
            solve_zero_sum(np.array([[1.0]]), tol=0.0)
        with pytest.raises(InvalidInputError):
            solve_zero_sum(np.zeros((0, 3)))


class TestPureResponses:
    def test_matching_pennies_pure(self):
        m = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert best_pure_row(m, np.array([1.0, 0.0])) == (0, 1.0)

    def test_uniform_mixes_mean(self, rng):
        m = rng.uniform(-1, 1, (5, 7))
        row, value = best_pure_row(m, np.full(7, 1 / 7))
        assert value == pytest.approx(m.mean(axis=1).max(), abs=1e-12)
        col, cvalue = best_pure_col(m, np.full(5, 1 / 5))
        assert cvalue == pytest.approx(m.mean(axis=0).min(), abs=1e-12)

    def test_published_game_pure_column(self):
        from advpred.core import AlignmentPotentials
        from advpred.oracle import exhaustive_equilibrium

        full = exhaustive_equilibrium("aer", AlignmentPotentials.zeros(2))
        col_nn = ["".join(s.names()) for s in full.adversary_space].index("NN")
        point = np.zeros(len(full.adversary_space))
        point[col_nn] = 1.0
        row, value = best_pure_row(full.matrix, point)
        assert "".join(full.predictor_space[row].names()) == "NN"
        assert value == 1.0

    def test_tie_breaks_lowest_index(self):
        m = np.array([[1.0, 1.0], [1.0, 1.0]])
        assert best_pure_row(m, np.array([0.5, 0.5]))[0] == 0
        assert best_pure_col(m, np.array([0.5, 0.5]))[0] == 0

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            best_pure_row(np.zeros((2, 2)), np.array([1.0]))
