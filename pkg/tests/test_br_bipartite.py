import numpy as np
import pytest
from scipy.optimize import linprog

from advpred.br_bipartite import (
    BipartiteOracle,
    CostFunction,
    MatchingConstraint,
    adversary_response,
    is_feasible,
    matching_score,
    max_weight_matching,
    predictor_response,
)
from advpred.core import (
    ADVERSARY_TAGS,
    LINK,
    POSSIBLE,
    PREDICTOR_TAGS,
    SURE,
    AlignmentPotentials,
    LabelSequence,
    MixedStrategy,
)
from advpred.errors import InvalidInputError
from advpred.oracle import (
    _matching_adversary_grids,
    _matching_predictor_grids,
    all_matchings,
    exhaustive_br,
)

from conftest import random_align_psi

PRED_LINKS = frozenset({LINK})
ADV_LINKS = frozenset({SURE, POSSIBLE})


def brute_best_matching(weights: np.ndarray) -> float:
    best = 0.0
    for edges in all_matchings(*weights.shape):
        best = max(best, sum(weights[r, c] for r, c in edges))
    return best


def matching_lp_value(weights: np.ndarray) -> float:
    """LP relaxation of the matching polytope; integral at the optimum."""
    r, c = weights.shape
    n = r * c
    a_ub = np.zeros((r + c, n))
    for i in range(r):
        a_ub[i, i * c:(i + 1) * c] = 1.0
    for j in range(c):
        a_ub[r + j, j::c] = 1.0
    res = linprog(
        -weights.ravel(), A_ub=a_ub, b_ub=np.ones(r + c), bounds=[(0, 1)] * n, method="highs"
    )
    assert res.status == 0
    return -res.fun


def feasible_mix(constraint, side, rng, max_support=4):
    grids = _matching_predictor_grids(constraint) if side == "pred" else _matching_adversary_grids(constraint)
    alphabet = PREDICTOR_TAGS if side == "pred" else ADVERSARY_TAGS
    k = int(rng.integers(1, min(max_support, len(grids)) + 1))
    idx = rng.choice(len(grids), size=k, replace=False)
    support = [LabelSequence(tuple(grids[i]), alphabet) for i in idx]
    return MixedStrategy.normalized(support, rng.random(k) + 0.01)


class TestMaxWeightMatching:
    def test_identity_grid(self):
        edges, total = max_weight_matching(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert edges == ((0, 0), (1, 1))
        assert total == 2.0

    def test_all_negative_empty(self):
        assert max_weight_matching(np.array([[-1.0, -2.0], [-0.5, -3.0]])) == ((), 0.0)

    def test_matches_brute_force(self, rng):
        for _ in range(120):
            shape = (int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            weights = rng.uniform(-1, 1, shape)
            edges, total = max_weight_matching(weights)
            assert total == pytest.approx(brute_best_matching(weights), abs=1e-9)
            rows = [r for r, _ in edges]
            cols = [c for _, c in edges]
            assert len(rows) == len(set(rows)) and len(cols) == len(set(cols))

    def test_matches_lp_relaxation(self, rng):
        # the relaxation is integral, so its optimum equals the matching's
        for _ in range(40):
            weights = rng.uniform(-1, 1, (4, 4))
            _, total = max_weight_matching(weights)
            assert total == pytest.approx(matching_lp_value(weights), abs=1e-7)

    def test_209_matchings_at_4x4(self):
        assert len(all_matchings(4, 4)) == 209


class TestResponses:
    def test_predictor_recovers_deterministic_matching(self):
        constraint = MatchingConstraint(2, 2)
        gold = LabelSequence.from_names("SNNS", ADVERSARY_TAGS)
        cost = CostFunction(0, 0, 1, 1, 1, 0)  # agreement-or-pay
        seq, _ = predictor_response(MixedStrategy.point_mass(gold), cost, constraint)
        assert seq.names() == ("A", "N", "N", "A")

    def test_empty_adversary_empty_prediction(self):
        constraint = MatchingConstraint(2, 2)
        gold = LabelSequence.from_names("NNNN", ADVERSARY_TAGS)
        seq, _ = predictor_response(MixedStrategy.point_mass(gold), CostFunction(), constraint)
        assert seq.count(LINK) == 0

    def test_matches_enumeration(self, rng):
        for trial in range(120):
            constraint = MatchingConstraint(int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            n = constraint.n
            cost = CostFunction() if trial % 2 else CostFunction(
                *(float(x) for x in np.round(rng.uniform(0, 1.5, 6), 3))
            )
            psi = random_align_psi(n, rng)
            amix = feasible_mix(constraint, "adv", rng)
            pmix = feasible_mix(constraint, "pred", rng)
            seq, value = predictor_response(amix, cost, constraint)
            assert is_feasible(seq, constraint, PRED_LINKS)
            _, want = exhaustive_br(amix, "bipartite", psi, "predictor", cost=cost, constraint=constraint)
            assert value == pytest.approx(want, abs=1e-9)
            seq, value = adversary_response(pmix, cost, psi, constraint)
            assert is_feasible(seq, constraint, ADV_LINKS)
            _, want = exhaustive_br(pmix, "bipartite", psi, "adversary", cost=cost, constraint=constraint)
            assert value == pytest.approx(want, abs=1e-9)

    def test_infeasible_support_rejected(self):
        constraint = MatchingConstraint(2, 2)
        double_link_row = LabelSequence.from_names("AANN", PREDICTOR_TAGS)
        with pytest.raises(InvalidInputError):
            adversary_response(
                MixedStrategy.point_mass(double_link_row),
                CostFunction(),
                AlignmentPotentials.zeros(4),
                constraint,
            )
        bad_gold = LabelSequence.from_names("SPNN", ADVERSARY_TAGS)
        with pytest.raises(InvalidInputError):
            predictor_response(MixedStrategy.point_mass(bad_gold), CostFunction(), constraint)

    def test_oracle_values_recomputable(self, rng):
        constraint = MatchingConstraint(2, 3)
        psi = random_align_psi(6, rng)
        cost = CostFunction()
        oracle = BipartiteOracle(cost, constraint)
        amix = feasible_mix(constraint, "adv", rng)
        seq, value = oracle.predictor_br(amix, psi)
        from advpred.core import expected_lagrangian

        direct = sum(p * matching_score(seq, s, cost) for s, p in amix.items())
        assert value == pytest.approx(direct - expected_lagrangian(amix, psi), abs=1e-9)


def test_matching_score_table():
    pred = LabelSequence.from_names("AN", PREDICTOR_TAGS)
    adv = LabelSequence.from_names("SN", ADVERSARY_TAGS)
    assert matching_score(pred, adv, CostFunction()) == 2.0  # both edges cost 0
    adv2 = LabelSequence.from_names("NS", ADVERSARY_TAGS)
    assert matching_score(pred, adv2, CostFunction()) == 0.0  # link_none + skip_sure
