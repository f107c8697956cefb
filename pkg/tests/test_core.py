import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advpred.core import (
    ADVERSARY_TAGS,
    LINK,
    PREDICTOR_TAGS,
    SURE,
    AlignmentPotentials,
    ChainPotentials,
    LabelSequence,
    MixedStrategy,
    TagAlphabet,
    aer_score,
    expected_lagrangian,
    f1_score,
    lagrangian,
    marginal_count_matrix,
    position_marginal,
)
from advpred.errors import InvalidInputError
from advpred.selftest import WORKED_EXAMPLE_GOLD, WORKED_EXAMPLE_PROPOSED

from conftest import random_chain_psi, random_mix

CHAIN2 = TagAlphabet(("C", "O"))


def chain(names: str) -> LabelSequence:
    return LabelSequence.from_names(names, CHAIN2)


def preds(names: str) -> LabelSequence:
    return LabelSequence.from_names(names, PREDICTOR_TAGS)


def golds(names: str) -> LabelSequence:
    return LabelSequence.from_names(names, ADVERSARY_TAGS)


class TestTypes:
    def test_alphabet_validation(self):
        with pytest.raises(InvalidInputError):
            TagAlphabet(())
        with pytest.raises(InvalidInputError):
            TagAlphabet(("A", "A"))
        with pytest.raises(InvalidInputError):
            TagAlphabet(("X", "Y"), "align-adversary")

    def test_sequence_validation(self):
        with pytest.raises(InvalidInputError):
            LabelSequence((), CHAIN2)
        with pytest.raises(InvalidInputError):
            LabelSequence((0, 2), CHAIN2)

    def test_mixed_strategy_validation(self):
        a, b = chain("CO"), chain("OC")
        MixedStrategy((a, b), (0.25, 0.75))
        with pytest.raises(InvalidInputError):
            MixedStrategy((a, a), (0.5, 0.5))
        with pytest.raises(InvalidInputError):
            MixedStrategy((a, b), (0.6, 0.6))
        with pytest.raises(InvalidInputError):
            MixedStrategy((a, b), (-0.1, 1.1))

    def test_normalized_clips_lp_roundoff(self):
        mix = MixedStrategy.normalized([chain("CO"), chain("OC")], [1.0, -1e-15])
        assert mix.probs == (1.0, 0.0)


class TestF1:
    def test_identity(self):
        assert f1_score(chain("COC"), chain("COC"), 0) == 1.0

    def test_half_overlap(self):
        # one shared C out of two predicted and two gold
        assert f1_score(chain("COC"), chain("CCO"), 0) == 0.5

    def test_both_empty_convention(self):
        assert f1_score(chain("OO"), chain("OO"), 0) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            f1_score(chain("CO"), chain("C"), 0)

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=9))
    def test_self_f1_is_one(self, tags):
        seq = LabelSequence(tuple(tags), CHAIN2)
        assert f1_score(seq, seq, 0) == 1.0

    @given(
        st.lists(st.integers(0, 1), min_size=1, max_size=9),
        st.lists(st.integers(0, 1), min_size=1, max_size=9),
    )
    def test_f1_range(self, a, b):
        k = min(len(a), len(b))
        x, y = LabelSequence(tuple(a[:k]), CHAIN2), LabelSequence(tuple(b[:k]), CHAIN2)
        assert 0.0 <= f1_score(x, y, 0) <= 1.0


class TestAer:
    def test_worked_example_exact(self):
        gold = golds(WORKED_EXAMPLE_GOLD)
        proposed = preds(WORKED_EXAMPLE_PROPOSED)
        assert aer_score(proposed, gold) == 5 / 13

    def test_zero_denominator_convention(self):
        assert aer_score(preds("NN"), golds("NP")) == 0.0

    def test_mixed_tags(self):
        # one sure match plus its possible match, two links, one sure tag
        assert aer_score(preds("ANA"), golds("SPN")) == 1 / 3

    def test_all_null_prediction(self):
        assert aer_score(preds("NNN"), golds("NPN")) == 0.0
        assert aer_score(preds("NNN"), golds("SPN")) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            aer_score(preds("AA"), golds("SPN"))

    @given(st.lists(st.integers(0, 1), min_size=2, max_size=8), st.data())
    def test_aer_range(self, ptags, data):
        gtags = data.draw(st.lists(st.integers(0, 2), min_size=len(ptags), max_size=len(ptags)))
        score = aer_score(LabelSequence(tuple(ptags), PREDICTOR_TAGS), LabelSequence(tuple(gtags), ADVERSARY_TAGS))
        assert 0.0 <= score <= 1.0


class TestMarginals:
    def test_deterministic_two_links(self):
        mix = MixedStrategy.point_mass(preds("AA"))
        marg = marginal_count_matrix(mix, LINK)
        assert marg.entries[0, 1] == 1.0 and marg.entries[1, 1] == 1.0
        assert marg.entries.sum() == 2.0
        assert marg.empty_mass == 0.0

    def test_half_empty(self):
        mix = MixedStrategy((preds("AN"), preds("NN")), (0.5, 0.5))
        marg = marginal_count_matrix(mix, LINK)
        assert marg.entries[0, 0] == 0.5
        assert marg.entries.sum() == 0.5
        assert marg.empty_mass == 0.5

    def test_matches_exhaustive_counting(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 7))
            mix = random_mix(ADVERSARY_TAGS, n, rng)
            marg = marginal_count_matrix(mix, SURE)
            expected = np.zeros((n, n))
            empty = 0.0
            for seq, p in mix.items():
                k = seq.count(SURE)
                if k == 0:
                    empty += p
                else:
                    for i, t in enumerate(seq.tags):
                        if t == SURE:
                            expected[i, k - 1] += p
            assert np.allclose(marg.entries, expected, atol=1e-12)
            assert marg.empty_mass == pytest.approx(empty, abs=1e-12)

    def test_row_sum_identity(self, rng):
        # column i-sums equal k * P(count == k)
        for _ in range(25):
            n = int(rng.integers(1, 8))
            mix = random_mix(PREDICTOR_TAGS, n, rng)
            marg = marginal_count_matrix(mix, LINK)
            count_prob = np.zeros(n)
            for seq, p in mix.items():
                k = seq.count(LINK)
                if k > 0:
                    count_prob[k - 1] += p
            for k in range(1, n + 1):
                assert marg.entries[:, k - 1].sum() == pytest.approx(k * count_prob[k - 1], abs=1e-9)
            assert marg.empty_mass + count_prob.sum() == pytest.approx(1.0, abs=1e-9)


class TestLagrangian:
    def test_zero_table(self):
        assert lagrangian(chain("COC"), ChainPotentials.zeros(3, 2)) == 0.0
        assert lagrangian(golds("SPN"), AlignmentPotentials.zeros(3)) == 0.0

    def test_alignment_direct_sum(self):
        psi = AlignmentPotentials(np.array([1.0, 2.0]), np.array([0.5, 0.5]))
        assert lagrangian(golds("SP"), psi) == 1.5

    def test_chain_matches_term_accumulation(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 7))
            psi = random_chain_psi(n, 2, rng)
            mix = random_mix(CHAIN2, n, rng, max_support=1)
            seq = mix.support[0]
            total = psi.unigram[0, seq.tags[0]] + psi.start[seq.tags[0]]
            for t in range(1, n):
                total += psi.unigram[t, seq.tags[t]] + psi.transition[t - 1, seq.tags[t - 1], seq.tags[t]]
            assert lagrangian(seq, psi) == pytest.approx(float(total), abs=1e-12)

    def test_expected_lagrangian(self, rng):
        psi = random_chain_psi(3, 2, rng)
        mix = random_mix(CHAIN2, 3, rng)
        direct = sum(p * lagrangian(s, psi) for s, p in mix.items())
        assert expected_lagrangian(mix, psi) == pytest.approx(direct, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            lagrangian(chain("CO"), ChainPotentials.zeros(3, 2))


def test_position_marginal(rng):
    mix = random_mix(PREDICTOR_TAGS, 5, rng)
    pm = position_marginal(mix, LINK)
    for i in range(5):
        assert pm[i] == pytest.approx(sum(p for s, p in mix.items() if s.tags[i] == LINK), abs=1e-12)
