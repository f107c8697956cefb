import numpy as np
import pytest

from advpred.br_fscore import (
    SuffixMaxCache,
    adversary_response,
    approx_adversary_response,
    approx_predictor_response,
    cost_grid,
    expected_f1,
    predictor_response,
    suffix_max,
)
from advpred.core import (
    ChainPotentials,
    LabelSequence,
    MixedStrategy,
    TagAlphabet,
    lagrangian,
    marginal_count_matrix,
)
from advpred.oracle import exhaustive_br

from conftest import random_chain_psi, random_mix

CHAIN2 = TagAlphabet(("C", "O"))


def chain(names: str) -> LabelSequence:
    return LabelSequence.from_names(names, CHAIN2)


def random_instance(rng, n_max=8, m_max=3, scale=1.0):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(2, m_max + 1))
    alphabet = TagAlphabet(tuple(f"K{i}" for i in range(m)))
    target = int(rng.integers(0, m))
    mix = random_mix(alphabet, n, rng)
    psi = random_chain_psi(n, m, rng, scale)
    return mix, psi, target


class TestCostGrid:
    def test_values(self):
        mix = MixedStrategy((chain("CO"), chain("CC")), (0.5, 0.5))
        grid = cost_grid(marginal_count_matrix(mix, 0))
        # position 1 carries C with count 1 (p=.5) and count 2 (p=.5)
        assert grid.f[0, 0] == pytest.approx(2 * (0.5 / 2 + 0.5 / 3))
        assert grid.f[1, 0] == pytest.approx(2 * (0.5 / 3))

    def test_monotone_in_count(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 9))
            mix = random_mix(CHAIN2, n, rng)
            grid = cost_grid(marginal_count_matrix(mix, 0))
            assert np.all(np.diff(grid.f, axis=1) <= 1e-15)

    def test_range(self, rng):
        mix = random_mix(CHAIN2, 6, rng)
        grid = cost_grid(marginal_count_matrix(mix, 0))
        assert np.all(grid.f >= 0.0) and np.all(grid.f <= 2.0)


class TestSuffixMax:
    def test_past_end_bases(self):
        psi = ChainPotentials.zeros(3, 2)
        grid = cost_grid(marginal_count_matrix(MixedStrategy.point_mass(chain("CCC")), 0))
        assert suffix_max(0, 4, 0, 2, grid, psi, 0) == ((), 0.0)
        tags, value = suffix_max(0, 4, 2, 2, grid, psi, 0)
        assert tags == () and value == -np.inf

    def test_matches_exhaustive_suffix_enumeration(self, rng):
        for _ in range(30):
            n = 3
            m = 2
            psi = random_chain_psi(n, m, rng)
            mix = random_mix(CHAIN2, n, rng)
            grid = cost_grid(marginal_count_matrix(mix, 0))
            cache = SuffixMaxCache(grid, psi, 0)
            for k in range(n + 1):
                for t in (2, 3):
                    for prev in range(m):
                        for r in range(k + 1):
                            got_tags, got = cache.suffix(prev, t, r, k)
                            best = -np.inf
                            for bits in range(2 ** (n - t + 1)):
                                tags = [(bits >> i) & 1 for i in range(n - t + 1)]
                                # class 0 is the target here; count zeros
                                if sum(1 for c in tags if c == 0) != r:
                                    continue
                                total, prev_c = 0.0, prev
                                for off, c in enumerate(tags):
                                    pos = t + off
                                    total += psi.unigram[pos - 1, c] + psi.transition[pos - 2, prev_c, c]
                                    if c == 0 and k > 0:
                                        total -= grid.f[pos - 1, k - 1]
                                    prev_c = c
                                best = max(best, total)
                            if np.isfinite(best) or np.isfinite(got):
                                assert got == pytest.approx(best, abs=1e-9)
                                assert sum(1 for c in got_tags if c == 0) == r

    def test_memo_determinism(self, rng):
        psi = random_chain_psi(5, 3, rng)
        mix = random_mix(TagAlphabet(("K0", "K1", "K2")), 5, rng)
        grid = cost_grid(marginal_count_matrix(mix, 1))
        cache = SuffixMaxCache(grid, psi, 1)
        first = cache.suffix(2, 3, 1, 2)
        assert cache.suffix(2, 3, 1, 2) == first


class TestExactMinimizer:
    def test_zero_overlap_predictor(self):
        # the opponent never plays the target: any response with a target
        # tag scores zero, while the empty branch pays the full empty mass
        mix = MixedStrategy.point_mass(chain("OOO"))
        psi = ChainPotentials.zeros(3, 2)
        seq, value = adversary_response(mix, psi, 0)
        assert value == pytest.approx(0.0, abs=1e-12)
        assert seq.count(0) >= 1

    def test_uniform_two_sequence_mix(self):
        mix = MixedStrategy((chain("CO"), chain("OC")), (0.5, 0.5))
        psi = ChainPotentials.zeros(2, 2)
        seq, value = adversary_response(mix, psi, 0)
        assert seq.names() == ("O", "O")
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_matches_enumeration(self, rng):
        for _ in range(250):
            mix, psi, target = random_instance(rng)
            seq, value = adversary_response(mix, psi, target)
            _, want = exhaustive_br(mix, "f1", psi, "adversary", target=target)
            assert value == pytest.approx(want, abs=1e-9)
            recomputed = expected_f1(mix, seq, target) - lagrangian(seq, psi)
            assert value == pytest.approx(recomputed, abs=1e-9)

    def test_tie_break_prefers_fewest_targets_then_lex(self):
        # all-zero potentials and an opponent that never plays the target
        # leave every target-free response tied at the empty-branch value
        mix = MixedStrategy.point_mass(LabelSequence((1, 1), TagAlphabet(("K0", "K1", "K2"))))
        psi = ChainPotentials.zeros(2, 3)
        seq, _ = adversary_response(mix, psi, 0)
        # lowest feasible target count is 1 here (the k=0 branch costs the
        # empty mass 1.0); among count-1 responses the lexicographically
        # smallest wins: target at position 1, lowest filler after it
        assert seq.tags == (0, 1)


class TestExactMaximizer:
    def test_deterministic_match(self, rng):
        seq = chain("COC")
        mix = MixedStrategy.point_mass(seq)
        got, value = predictor_response(mix, 0)
        assert got.tags == seq.tags
        assert value == pytest.approx(1.0)

    def test_all_non_target(self):
        mix = MixedStrategy.point_mass(chain("OOO"))
        got, value = predictor_response(mix, 0)
        assert got.names() == ("O", "O", "O")
        assert value == pytest.approx(1.0)

    def test_matches_enumeration(self, rng):
        for _ in range(200):
            mix, _, target = random_instance(rng)
            _, value = predictor_response(mix, target)
            _, want = exhaustive_br(
                mix, "f1", ChainPotentials.zeros(mix.n, len(mix.alphabet)), "predictor", target=target
            )
            assert value == pytest.approx(want, abs=1e-9)

    def test_filler_is_lowest_non_target(self):
        alphabet = TagAlphabet(("K0", "K1", "K2"))
        mix = MixedStrategy.point_mass(LabelSequence((0, 1), alphabet))
        got, _ = predictor_response(mix, 0)
        assert got.tags == (0, 1)  # filler for target 0 is class 1
        got, _ = predictor_response(mix, 1)
        assert set(got.tags) <= {0, 1}


class TestApproximations:
    def test_adversary_never_below_exact(self, rng):
        for _ in range(150):
            mix, psi, target = random_instance(rng, scale=0.5)
            _, exact = adversary_response(mix, psi, target)
            _, approx = approx_adversary_response(mix, psi, target)
            assert approx >= exact - 1e-12

    def test_predictor_never_above_exact(self, rng):
        for _ in range(150):
            mix, _, target = random_instance(rng)
            _, exact = predictor_response(mix, target)
            _, approx = approx_predictor_response(mix, target)
            assert approx <= exact + 1e-12

    def test_containment_gives_equality(self):
        # opponent with an unambiguous best response: all candidates agree
        mix = MixedStrategy.point_mass(chain("OOO"))
        psi = ChainPotentials.zeros(3, 2)
        # huge bonus for one specific target placement dominates everything
        psi = ChainPotentials(np.array([[5.0, 0.0], [0.0, 0.0], [0.0, 0.0]]), np.zeros(2), psi.transition)
        eseq, ev = adversary_response(mix, psi, 0)
        aseq, av = approx_adversary_response(mix, psi, 0)
        assert aseq.tags == eseq.tags
        assert av == pytest.approx(ev, abs=1e-12)

    def test_predictor_deterministic_adversary(self):
        mix = MixedStrategy.point_mass(chain("COC"))
        seq, value = approx_predictor_response(mix, 0)
        assert seq.tags == chain("COC").tags
        assert value == pytest.approx(1.0)

    def test_predictor_all_non_target(self):
        mix = MixedStrategy.point_mass(chain("OOO"))
        seq, value = approx_predictor_response(mix, 0)
        assert seq.names() == ("O", "O", "O")
        assert value == pytest.approx(1.0)

    def test_agreement_rate_reported_distribution(self, rng):
        agree = 0
        trials = 120
        for _ in range(trials):
            mix, psi, target = random_instance(rng, scale=0.25)
            eseq, _ = adversary_response(mix, psi, target)
            aseq, _ = approx_adversary_response(mix, psi, target)
            agree += aseq.tags == eseq.tags
        assert agree / trials >= 0.8
