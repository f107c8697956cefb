"""Brute-force reference implementations.

Literal enumerations of strategy spaces back every randomized equivalence
suite and the self-test command: exhaustive best responses, exhaustive
expected scores, and full-matrix equilibria. These are the ground truth the
fast paths are judged against; they optimize for obviousness, not speed,
beyond vectorizing the score arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .br_bipartite import CostFunction, MatchingConstraint
from .core import (
    ADVERSARY_TAGS,
    LINK,
    NOLINK,
    NULL,
    POSSIBLE,
    PREDICTOR_TAGS,
    SURE,
    AlignmentPotentials,
    ChainPotentials,
    LabelSequence,
    MixedStrategy,
    PotentialTable,
    TagAlphabet,
    expected_lagrangian,
)
from .errors import BudgetExceededError, InvalidInputError
from .matrixgame import Equilibrium, solve_zero_sum

#: Default cap on evaluated payoff entries per enumeration.
DEFAULT_BUDGET = 2_000_000


def all_tag_grids(m: int, n: int) -> np.ndarray:
    """All m**n tag-index sequences, ascending lexicographically."""
    grids = np.indices((m,) * n).reshape(n, -1).T
    return np.ascontiguousarray(grids)


def chain_mask_grids(m: int, n: int, target: int) -> np.ndarray:
    """All 2**n predictor masks: target versus the lowest non-target class."""
    filler = next(c for c in range(m) if c != target)
    bits = all_tag_grids(2, n)
    return np.where(bits == 0, target, filler)


def all_matchings(source_count: int, target_count: int):
    """Every one-to-one partial matching, as a list of (row, col) edge tuples."""
    out: list[tuple[tuple[int, int], ...]] = []

    def grow(row: int, used: tuple[int, ...], edges: tuple[tuple[int, int], ...]):
        if row == source_count:
            out.append(edges)
            return
        grow(row + 1, used, edges)
        for col in range(target_count):
            if col not in used:
                grow(row + 1, used + (col,), edges + ((row, col),))

    grow(0, (), ())
    return out


def _matching_predictor_grids(constraint: MatchingConstraint) -> np.ndarray:
    rows = []
    for edges in all_matchings(constraint.source_count, constraint.target_count):
        tags = np.full(constraint.n, NULL, dtype=np.int64)
        for i, j in edges:
            tags[i * constraint.target_count + j] = LINK
        rows.append(tags)
    return np.array(rows)


def _matching_adversary_grids(constraint: MatchingConstraint) -> np.ndarray:
    rows = []
    for edges in all_matchings(constraint.source_count, constraint.target_count):
        for labels in all_tag_grids(2, len(edges)) if edges else [np.empty(0, dtype=np.int64)]:
            tags = np.full(constraint.n, NOLINK, dtype=np.int64)
            for (i, j), lab in zip(edges, labels):
                tags[i * constraint.target_count + j] = SURE if lab == 0 else POSSIBLE
            rows.append(tags)
    return np.array(rows)


def score_matrix(
    pred_grids: np.ndarray,
    adv_grids: np.ndarray,
    score_kind: str,
    target: int | None = None,
    cost: CostFunction | None = None,
) -> np.ndarray:
    """Pure score of every predictor row against every adversary column."""
    if score_kind == "f1":
        pt = (pred_grids == target).astype(float)
        at = (adv_grids == target).astype(float)
        inter = pt @ at.T
        denom = pt.sum(axis=1)[:, None] + at.sum(axis=1)[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            out = 2.0 * inter / denom
        out[denom == 0.0] = 1.0
        return out
    if score_kind == "aer":
        links = (pred_grids == LINK).astype(float)
        sure = (adv_grids == SURE).astype(float)
        poss = (adv_grids != NOLINK).astype(float)  # sure counts as possible
        num = links @ sure.T + links @ poss.T
        denom = links.sum(axis=1)[:, None] + sure.sum(axis=1)[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            out = num / denom
        out[denom == 0.0] = 1.0
        return out
    if score_kind == "bipartite":
        table = cost.table()
        n = pred_grids.shape[1]
        total = np.zeros((pred_grids.shape[0], adv_grids.shape[0]))
        for i in range(n):
            total += table[pred_grids[:, i]][:, adv_grids[:, i]]
        return n - total
    raise InvalidInputError(f"unknown score kind: {score_kind!r}")


def lagrangian_vector(adv_grids: np.ndarray, psi: PotentialTable) -> np.ndarray:
    """Potential of every adversary row, vectorized."""
    if isinstance(psi, ChainPotentials):
        n = psi.n
        out = psi.unigram[np.arange(n)[None, :], adv_grids].sum(axis=1)
        out = out + psi.start[adv_grids[:, 0]]
        if n > 1:
            out = out + psi.transition[
                np.arange(n - 1)[None, :], adv_grids[:, :-1], adv_grids[:, 1:]
            ].sum(axis=1)
        return out
    if isinstance(psi, AlignmentPotentials):
        return (adv_grids == SURE) @ psi.sure + (adv_grids == POSSIBLE) @ psi.possible
    raise InvalidInputError(f"unsupported potential table type: {type(psi).__name__}")


def _candidate_grids(
    side: str,
    score_kind: str,
    n: int,
    alphabet: TagAlphabet | None,
    target: int | None,
    constraint: MatchingConstraint | None,
) -> tuple[np.ndarray, TagAlphabet]:
    if score_kind == "f1":
        if alphabet is None or target is None:
            raise InvalidInputError("the F1 game needs a chain alphabet and target")
        m = len(alphabet)
        grids = chain_mask_grids(m, n, target) if side == "predictor" else all_tag_grids(m, n)
        return grids, alphabet
    if score_kind == "aer":
        if side == "predictor":
            return all_tag_grids(2, n), PREDICTOR_TAGS
        return all_tag_grids(3, n), ADVERSARY_TAGS
    if score_kind == "bipartite":
        if constraint is None:
            raise InvalidInputError("the matching game needs grid dimensions")
        if side == "predictor":
            return _matching_predictor_grids(constraint), PREDICTOR_TAGS
        return _matching_adversary_grids(constraint), ADVERSARY_TAGS
    raise InvalidInputError(f"unknown score kind: {score_kind!r}")


def exhaustive_br(
    opponent_mix: MixedStrategy,
    score_kind: str,
    psi: PotentialTable,
    side: str,
    *,
    target: int | None = None,
    cost: CostFunction | None = None,
    constraint: MatchingConstraint | None = None,
    budget: int = DEFAULT_BUDGET,
) -> tuple[LabelSequence, float]:
    """Literal arg-optimum over the whole strategy space.

    The predictor side maximizes expected score; the adversary side
    minimizes expected score minus its own potential. Ties go to the
    enumeration-order first candidate.
    """
    if side not in ("predictor", "adversary"):
        raise InvalidInputError(f"unknown side: {side!r}")
    n = opponent_mix.n
    alphabet = opponent_mix.alphabet if score_kind == "f1" else None
    grids, out_alphabet = _candidate_grids(side, score_kind, n, alphabet, target, constraint)
    if grids.shape[0] * len(opponent_mix.support) > budget:
        raise BudgetExceededError(
            f"{grids.shape[0]} candidates x {len(opponent_mix.support)} opponents exceeds budget {budget}"
        )
    opp = np.array([seq.tags for seq in opponent_mix.support])
    probs = np.asarray(opponent_mix.probs)
    if side == "predictor":
        scores = score_matrix(grids, opp, score_kind, target, cost)
        values = scores @ probs
        best = int(np.argmax(values))
    else:
        scores = score_matrix(opp, grids, score_kind, target, cost)
        values = probs @ scores - lagrangian_vector(grids, psi)
        best = int(np.argmin(values))
    return LabelSequence(tuple(grids[best]), out_alphabet), float(values[best])


@dataclass(frozen=True)
class FullGameResult:
    """A fully enumerated game: both spaces, the payoff matrix, and its equilibrium."""

    predictor_space: tuple[LabelSequence, ...]
    adversary_space: tuple[LabelSequence, ...]
    matrix: np.ndarray
    equilibrium: Equilibrium

    @property
    def value(self) -> float:
        return self.equilibrium.value


def exhaustive_equilibrium(
    score_kind: str,
    psi: PotentialTable,
    *,
    alphabet: TagAlphabet | None = None,
    target: int | None = None,
    cost: CostFunction | None = None,
    constraint: MatchingConstraint | None = None,
    tol: float = 1e-9,
    budget: int = DEFAULT_BUDGET,
) -> FullGameResult:
    """Materialize the complete payoff matrix and solve it exactly."""
    n = psi.n
    pred_grids, pred_alpha = _candidate_grids("predictor", score_kind, n, alphabet, target, constraint)
    adv_grids, adv_alpha = _candidate_grids("adversary", score_kind, n, alphabet, target, constraint)
    if pred_grids.shape[0] * adv_grids.shape[0] > budget:
        raise BudgetExceededError(
            f"{pred_grids.shape[0]} x {adv_grids.shape[0]} payoff matrix exceeds budget {budget}"
        )
    matrix = score_matrix(pred_grids, adv_grids, score_kind, target, cost)
    matrix = matrix - lagrangian_vector(adv_grids, psi)[None, :]
    eq = solve_zero_sum(matrix, tol)
    return FullGameResult(
        predictor_space=tuple(LabelSequence(tuple(g), pred_alpha) for g in pred_grids),
        adversary_space=tuple(LabelSequence(tuple(g), adv_alpha) for g in adv_grids),
        matrix=matrix,
        equilibrium=eq,
    )


class ExhaustiveOracle:
    """Best-response oracle backed by literal enumeration; values are net payoffs."""

    exact = True

    def __init__(
        self,
        score_kind: str,
        *,
        target: int | None = None,
        cost: CostFunction | None = None,
        constraint: MatchingConstraint | None = None,
        budget: int = DEFAULT_BUDGET,
    ):
        self.score_kind = score_kind
        self.target = target
        self.cost = cost
        self.constraint = constraint
        self.budget = budget

    def predictor_br(self, adversary_mix: MixedStrategy, psi: PotentialTable):
        seq, val = exhaustive_br(
            adversary_mix,
            self.score_kind,
            psi,
            "predictor",
            target=self.target,
            cost=self.cost,
            constraint=self.constraint,
            budget=self.budget,
        )
        return seq, val - expected_lagrangian(adversary_mix, psi)

    def adversary_br(self, predictor_mix: MixedStrategy, psi: PotentialTable):
        return exhaustive_br(
            predictor_mix,
            self.score_kind,
            psi,
            "adversary",
            target=self.target,
            cost=self.cost,
            constraint=self.constraint,
            budget=self.budget,
        )
