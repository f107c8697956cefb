"""Best responses for the (1 - AER) word-alignment game.

The adversary tags every source-target edge sure (S), possible (P), or
untagged (N) to minimize the opponent's expected alignment quality minus
the adversary's own potential. Conditioning on the number k of sure tags
makes the objective separable: a sure tag at edge i costs ``sure[i, k]``,
a possible tag ``possible[i, k]``, an untagged edge nothing. With exactly
k sure tags required, the k edges whose sure cost exceeds their best
alternative by the least become sure; the rest go possible wherever that
is negative. The k = 0 slice instead prices possible tags against the
opponent's link counts alone and credits the opponent's no-link mass,
which scores a full point whenever no sure tag exists.

The predictor's response ignores potentials. Expected quality of linking
edge i decomposes over joint (position, sure-count) marginals for sure
tags and, with the count shifted by one, for possible-only tags; for each
link count the best mask takes the top positions of that count's column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ADVERSARY_TAGS,
    ALIGN_ADVERSARY,
    ALIGN_PREDICTOR,
    LINK,
    NOLINK,
    NULL,
    POSSIBLE,
    PREDICTOR_TAGS,
    SURE,
    AlignmentPotentials,
    LabelSequence,
    MarginalCountMatrix,
    MixedStrategy,
    aer_score,
    expected_lagrangian,
    marginal_count_matrix,
)
from .errors import InvalidInputError


@dataclass(frozen=True)
class AerCostTables:
    """Per-edge prices of adversary tags, by total sure count.

    ``sure[i, k]`` / ``possible[i, k]`` price an S / P tag at edge i+1 when
    k+1 sure tags exist overall; ``zero[i]`` prices a P tag when none do.
    """

    sure: np.ndarray  # (n, n)
    possible: np.ndarray  # (n, n)
    zero: np.ndarray  # (n,)


def aer_cost_tables(link_marginals: MarginalCountMatrix, psi: AlignmentPotentials) -> AerCostTables:
    n = link_marginals.n
    if psi.n != n:
        raise InvalidInputError("potential length does not match the marginal grid")
    counts = np.arange(1, n + 1)
    weights = 1.0 / np.add.outer(counts, counts)  # [link count, sure count]
    base = link_marginals.entries @ weights
    sure = 2.0 * base - psi.sure[:, None]
    possible = base - psi.possible[:, None]
    zero = link_marginals.entries @ (1.0 / counts) - psi.possible
    return AerCostTables(sure, possible, zero)


def _check_alignment_mix(mix: MixedStrategy, role: str) -> None:
    if mix.alphabet.role != role:
        raise InvalidInputError(f"expected a {role} strategy, got {mix.alphabet.role}")


def adversary_response(
    predictor_mix: MixedStrategy, psi: AlignmentPotentials
) -> tuple[LabelSequence, float]:
    """Exact minimizer of expected (1 - AER) minus potential."""
    _check_alignment_mix(predictor_mix, ALIGN_PREDICTOR)
    if predictor_mix.n != psi.n:
        raise InvalidInputError("strategy and potential dimensions disagree")
    marg = marginal_count_matrix(predictor_mix, LINK)
    tables = aer_cost_tables(marg, psi)
    n = marg.n

    best_tags = np.where(tables.zero < 0.0, POSSIBLE, NOLINK)
    best_val = float(np.minimum(tables.zero, 0.0).sum() + marg.empty_mass)
    for k in range(1, n + 1):
        sure_cost = tables.sure[:, k - 1]
        poss_cost = tables.possible[:, k - 1]
        premium = sure_cost - np.minimum(poss_cost, 0.0)
        order = np.argsort(premium, kind="stable")
        tags = np.where(poss_cost < 0.0, POSSIBLE, NOLINK)
        tags[order[:k]] = SURE
        val = float(sure_cost[order[:k]].sum() + poss_cost[tags == POSSIBLE].sum())
        if val < best_val:
            best_val = val
            best_tags = tags
    return LabelSequence(tuple(best_tags), ADVERSARY_TAGS), best_val


def predictor_response(adversary_mix: MixedStrategy) -> tuple[LabelSequence, float]:
    """Exact maximizer of expected (1 - AER); potentials are constants here."""
    _check_alignment_mix(adversary_mix, ALIGN_ADVERSARY)
    n = adversary_mix.n
    sure_marg = marginal_count_matrix(adversary_mix, SURE)
    # Possible-only tags enter jointly with the sure count shifted up by one,
    # which keeps the one-column layout valid when no sure tag exists.
    poss_shifted = np.zeros((n, n))
    for seq, prob in adversary_mix.items():
        if prob <= 0.0:
            continue
        poss_mask = seq.mask(POSSIBLE)
        if poss_mask.any():  # a possible-only tag caps the sure count at n - 1
            poss_shifted[poss_mask, seq.count(SURE)] += prob
    link_counts = np.arange(1, n + 1)
    sure_weights = 2.0 / np.add.outer(link_counts, link_counts)
    shifted_weights = 1.0 / np.add.outer(link_counts, link_counts - 1)
    gains = sure_marg.entries @ sure_weights + poss_shifted @ shifted_weights

    best_val = sure_marg.empty_mass  # the empty grid scores 1 against sure-free responses
    best_positions = np.empty(0, dtype=np.int64)
    for a in range(1, n + 1):
        col = gains[:, a - 1]
        order = np.argsort(-col, kind="stable")
        positions = np.sort(order[:a])
        val = float(col[positions].sum())
        if val > best_val:
            best_val = val
            best_positions = positions
    tags = np.full(n, NULL, dtype=np.int64)
    tags[best_positions] = LINK
    return LabelSequence(tuple(tags), PREDICTOR_TAGS), float(best_val)


def expected_quality(pred: LabelSequence, adversary_mix: MixedStrategy) -> float:
    """Expected (1 - AER) of one grid against a mixed adversary."""
    return float(
        sum(p * (1.0 - aer_score(pred, seq)) for seq, p in adversary_mix.items() if p > 0.0)
    )


class AerOracle:
    """Best-response oracle for the (1 - AER) game; values are net payoffs."""

    exact = True

    def predictor_br(self, adversary_mix: MixedStrategy, psi: AlignmentPotentials):
        seq, val = predictor_response(adversary_mix)
        return seq, val - expected_lagrangian(adversary_mix, psi)

    def adversary_br(self, predictor_mix: MixedStrategy, psi: AlignmentPotentials):
        return adversary_response(predictor_mix, psi)
