"""Best responses for the bipartite-matching alignment game.

Here the score is additive: each edge contributes one minus a configurable
tag-pair cost, and both players must respect matching feasibility (at most
one link per source row and per target column). Expected per-edge gains
plus the adversary's potentials become edge weights, and a maximum-weight
partial matching picks the response. The matching itself runs on a square
matrix padded with zero-weight dummy assignments so unprofitable edges are
never forced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

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
    MixedStrategy,
    expected_lagrangian,
    position_marginal,
)
from .errors import InvalidInputError


@dataclass(frozen=True)
class CostFunction:
    """Per-edge loss of a predictor tag against an adversary tag.

    Defaults are Hamming-like with possible tags treated as free either way.
    """

    link_sure: float = 0.0
    link_possible: float = 0.0
    link_none: float = 1.0
    skip_sure: float = 1.0
    skip_possible: float = 0.0
    skip_none: float = 0.0

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not np.isfinite(value):
                raise InvalidInputError(f"cost {name} must be finite")

    def as_dict(self) -> dict[str, float]:
        return {
            "link_sure": self.link_sure,
            "link_possible": self.link_possible,
            "link_none": self.link_none,
            "skip_sure": self.skip_sure,
            "skip_possible": self.skip_possible,
            "skip_none": self.skip_none,
        }

    def table(self) -> np.ndarray:
        """Lookup indexed by (predictor tag, adversary tag)."""
        return np.array(
            [
                [self.link_sure, self.link_possible, self.link_none],
                [self.skip_sure, self.skip_possible, self.skip_none],
            ]
        )


@dataclass(frozen=True)
class MatchingConstraint:
    """Grid dimensions; rows and columns each admit at most one link."""

    source_count: int
    target_count: int

    def __post_init__(self):
        if self.source_count < 1 or self.target_count < 1:
            raise InvalidInputError("matching grid needs positive dimensions")

    @property
    def n(self) -> int:
        return self.source_count * self.target_count

    def edge(self, pos: int) -> tuple[int, int]:
        return divmod(pos, self.target_count)


def max_weight_matching(weights: np.ndarray) -> tuple[tuple[tuple[int, int], ...], float]:
    """Maximum-weight one-to-one partial matching; negative edges never forced."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.size == 0:
        raise InvalidInputError("weights must form a non-empty 2-D grid")
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("matching weights must be finite")
    rows, cols = w.shape
    padded = np.zeros((rows + cols, rows + cols))
    padded[:rows, :cols] = w
    ri, ci = linear_sum_assignment(padded, maximize=True)
    edges = tuple(
        sorted((int(r), int(c)) for r, c in zip(ri, ci) if r < rows and c < cols and w[r, c] > 0.0)
    )
    total = float(sum(w[r, c] for r, c in edges))
    return edges, total


def is_feasible(seq: LabelSequence, constraint: MatchingConstraint, link_tags: frozenset[int]) -> bool:
    if len(seq) != constraint.n:
        return False
    used_rows: set[int] = set()
    used_cols: set[int] = set()
    for pos, tag in enumerate(seq.tags):
        if tag in link_tags:
            i, j = constraint.edge(pos)
            if i in used_rows or j in used_cols:
                return False
            used_rows.add(i)
            used_cols.add(j)
    return True


_PREDICTOR_LINKS = frozenset({LINK})
_ADVERSARY_LINKS = frozenset({SURE, POSSIBLE})


def _check_support(mix: MixedStrategy, constraint: MatchingConstraint, links: frozenset[int]) -> None:
    for seq in mix.support:
        if not is_feasible(seq, constraint, links):
            raise InvalidInputError("opponent support contains a non-matching sequence")


def matching_score(pred: LabelSequence, adv: LabelSequence, cost: CostFunction) -> float:
    """Total edge score: one minus the tag-pair cost, summed over the grid."""
    if len(pred) != len(adv):
        raise InvalidInputError(f"length mismatch: {len(pred)} vs {len(adv)}")
    if pred.alphabet.role != ALIGN_PREDICTOR or adv.alphabet.role != ALIGN_ADVERSARY:
        raise InvalidInputError("matching scores compare a predictor grid with an adversary grid")
    table = cost.table()
    return float(sum(1.0 - table[p, a] for p, a in zip(pred.tags, adv.tags)))


def predictor_response(
    adversary_mix: MixedStrategy, cost: CostFunction, constraint: MatchingConstraint
) -> tuple[LabelSequence, float]:
    """Feasible link grid maximizing the expected matching score."""
    if adversary_mix.alphabet.role != ALIGN_ADVERSARY:
        raise InvalidInputError("predictor responds to an adversary strategy")
    _check_support(adversary_mix, constraint, _ADVERSARY_LINKS)
    p_sure = position_marginal(adversary_mix, SURE)
    p_poss = position_marginal(adversary_mix, POSSIBLE)
    p_none = 1.0 - p_sure - p_poss
    link_cost = cost.link_sure * p_sure + cost.link_possible * p_poss + cost.link_none * p_none
    skip_cost = cost.skip_sure * p_sure + cost.skip_possible * p_poss + cost.skip_none * p_none
    gains = (skip_cost - link_cost).reshape(constraint.source_count, constraint.target_count)
    edges, total = max_weight_matching(gains)
    tags = np.full(constraint.n, NULL, dtype=np.int64)
    for i, j in edges:
        tags[i * constraint.target_count + j] = LINK
    value = float((1.0 - skip_cost).sum() + total)
    return LabelSequence(tuple(tags), PREDICTOR_TAGS), value


def adversary_response(
    predictor_mix: MixedStrategy,
    cost: CostFunction,
    psi: AlignmentPotentials,
    constraint: MatchingConstraint,
) -> tuple[LabelSequence, float]:
    """Feasible tag grid minimizing expected score minus potential.

    Each linked edge carries whichever of sure/possible is cheaper for the
    adversary (sure wins ties) before the matching selects the link set.
    """
    if predictor_mix.alphabet.role != ALIGN_PREDICTOR:
        raise InvalidInputError("adversary responds to a predictor strategy")
    if psi.n != constraint.n:
        raise InvalidInputError("potential length does not match the grid")
    _check_support(predictor_mix, constraint, _PREDICTOR_LINKS)
    p_link = position_marginal(predictor_mix, LINK)
    p_skip = 1.0 - p_link

    def edge_value(link_c: float, skip_c: float) -> np.ndarray:
        return 1.0 - (p_link * link_c + p_skip * skip_c)

    value_none = edge_value(cost.link_none, cost.skip_none)
    value_sure = edge_value(cost.link_sure, cost.skip_sure) - psi.sure
    value_poss = edge_value(cost.link_possible, cost.skip_possible) - psi.possible
    linked_value = np.minimum(value_sure, value_poss)
    linked_tag = np.where(value_sure <= value_poss, SURE, POSSIBLE)
    gains = (value_none - linked_value).reshape(constraint.source_count, constraint.target_count)
    edges, total = max_weight_matching(gains)
    tags = np.full(constraint.n, NOLINK, dtype=np.int64)
    for i, j in edges:
        pos = i * constraint.target_count + j
        tags[pos] = linked_tag[pos]
    value = float(value_none.sum() - total)
    return LabelSequence(tuple(tags), ADVERSARY_TAGS), value


class BipartiteOracle:
    """Best-response oracle for the matching game; values are net payoffs."""

    exact = True

    def __init__(self, cost: CostFunction, constraint: MatchingConstraint):
        self.cost = cost
        self.constraint = constraint

    def predictor_br(self, adversary_mix: MixedStrategy, psi: AlignmentPotentials):
        seq, val = predictor_response(adversary_mix, self.cost, self.constraint)
        return seq, val - expected_lagrangian(adversary_mix, psi)

    def adversary_br(self, predictor_mix: MixedStrategy, psi: AlignmentPotentials):
        return adversary_response(predictor_mix, self.cost, psi, self.constraint)
