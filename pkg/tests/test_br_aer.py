import numpy as np
import pytest

from advpred.br_aer import (
    adversary_response,
    aer_cost_tables,
    expected_quality,
    predictor_response,
)
from advpred.core import (
    ADVERSARY_TAGS,
    LINK,
    NOLINK,
    NULL,
    PREDICTOR_TAGS,
    AlignmentPotentials,
    LabelSequence,
    MixedStrategy,
    marginal_count_matrix,
)
from advpred.oracle import exhaustive_br

from conftest import random_align_psi, random_mix


def preds(names: str) -> LabelSequence:
    return LabelSequence.from_names(names, PREDICTOR_TAGS)


def golds(names: str) -> LabelSequence:
    return LabelSequence.from_names(names, ADVERSARY_TAGS)


def mix_with_empty(alphabet, n, rng, empty_tag):
    mix = random_mix(alphabet, n, rng)
    empty = LabelSequence((empty_tag,) * n, alphabet)
    if all(s.tags != empty.tags for s in mix.support):
        mix = MixedStrategy.normalized(mix.support + (empty,), list(mix.probs) + [0.4])
    return mix


class TestCostTables:
    def test_construction(self, rng):
        n = 4
        mix = random_mix(PREDICTOR_TAGS, n, rng)
        psi = random_align_psi(n, rng)
        marg = marginal_count_matrix(mix, LINK)
        tables = aer_cost_tables(marg, psi)
        counts = np.arange(1, n + 1)
        base = marg.entries @ (1.0 / np.add.outer(counts, counts))
        assert np.allclose(tables.sure, 2 * base - psi.sure[:, None])
        assert np.allclose(tables.possible, base - psi.possible[:, None])
        assert np.allclose(tables.zero, marg.entries @ (1.0 / counts) - psi.possible)


class TestAdversary:
    def test_against_two_links(self):
        # the published two-edge game: against a pure double-link the
        # minimizing response is the empty grid at value zero
        seq, value = adversary_response(MixedStrategy.point_mass(preds("AA")), AlignmentPotentials.zeros(2))
        assert seq.names() == ("N", "N")
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_against_empty_prediction(self):
        # one unmatched sure tag zeroes the score of a linkless predictor
        seq, value = adversary_response(MixedStrategy.point_mass(preds("NN")), AlignmentPotentials.zeros(2))
        assert value == pytest.approx(0.0, abs=1e-12)
        assert seq.count(0) == 1  # exactly one sure tag

    def test_matches_enumeration(self, rng):
        for trial in range(250):
            n = int(rng.integers(1, 8))
            mix = mix_with_empty(PREDICTOR_TAGS, n, rng, NULL) if trial % 3 == 0 else random_mix(PREDICTOR_TAGS, n, rng)
            psi = random_align_psi(n, rng)
            _, value = adversary_response(mix, psi)
            _, want = exhaustive_br(mix, "aer", psi, "adversary")
            assert value == pytest.approx(want, abs=1e-9)

    def test_zero_potential_position_symmetry(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 7))
            mix = random_mix(PREDICTOR_TAGS, n, rng)
            perm = rng.permutation(n)
            permuted = MixedStrategy(
                tuple(LabelSequence(tuple(s.tags[p] for p in perm), PREDICTOR_TAGS) for s in mix.support),
                mix.probs,
            )
            psi = AlignmentPotentials.zeros(n)
            seq1, val1 = adversary_response(mix, psi)
            seq2, val2 = adversary_response(permuted, psi)
            assert val1 == pytest.approx(val2, abs=1e-9)
            assert sorted(seq1.tags) == sorted(seq2.tags)


class TestPredictor:
    def test_single_sure_position(self):
        seq, value = predictor_response(MixedStrategy.point_mass(golds("NSN")))
        assert seq.names() == ("N", "A", "N")
        assert value == pytest.approx(1.0)

    def test_all_possible_breaks_tie_to_empty(self):
        # every response scores 1 against an all-possible grid; the empty
        # link set wins the tie
        seq, value = predictor_response(MixedStrategy.point_mass(golds("PP")))
        assert seq.names() == ("N", "N")
        assert value == pytest.approx(1.0)

    def test_matches_enumeration(self, rng):
        for trial in range(250):
            n = int(rng.integers(1, 8))
            mix = mix_with_empty(ADVERSARY_TAGS, n, rng, NOLINK) if trial % 3 == 0 else random_mix(ADVERSARY_TAGS, n, rng)
            seq, value = predictor_response(mix)
            _, want = exhaustive_br(mix, "aer", AlignmentPotentials.zeros(n), "predictor")
            assert value == pytest.approx(want, abs=1e-9)
            assert expected_quality(seq, mix) == pytest.approx(value, abs=1e-9)
