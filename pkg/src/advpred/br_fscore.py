"""Best responses for the per-class F1 game on linear chains.

The adversary picks the sequence minimizing expected F1 minus its own
potential. Conditioning on the response's total target count k makes the
expected-overlap term decompose per position with a count-dependent price
(``CostGrid``), so each k-slice reduces to maximizing potential minus price
over sequences with exactly k target tags — a backward dynamic program over
(previous class, position, remaining target budget). The k = 0 slice
additionally pays the opponent's zero-target mass, which scores a full
point against an empty response.

The predictor ignores potentials (they depend on the adversary only) and
maximizes expected F1 from the adversary's count marginals: for each k the
best k-target mask takes the top-k positions of the k-th price column.

Both exact responses have O(m^2 n^3) / O(n^2) cost; the approximate
variants trade exactness for one Viterbi pass (adversary) or a thresholded
position-wise choice (predictor) per point of a fixed cost-ratio grid,
with candidates re-scored under the true objective.

Tie-breaking throughout: the smallest target count wins, then the
lexicographically smallest sequence in class-index order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ChainPotentials,
    LabelSequence,
    MarginalCountMatrix,
    MixedStrategy,
    expected_lagrangian,
    f1_score,
    lagrangian,
    marginal_count_matrix,
    position_marginal,
)
from .errors import InvalidInputError

#: Cost ratios probed by the approximate responses.
COST_RATIO_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))

_NEG = -np.inf


@dataclass(frozen=True)
class CostGrid:
    """Per-position, per-count prices of a target tag.

    ``f[t, k]`` is twice the expected overlap credit of a target tag at
    position t+1 inside a response carrying k+1 target tags total. Rows are
    nonincreasing along k: more claimed tags dilute each one.
    """

    f: np.ndarray  # (n, n)


def cost_grid(marginals: MarginalCountMatrix) -> CostGrid:
    n = marginals.n
    counts = np.arange(1, n + 1)
    weights = 1.0 / np.add.outer(counts, counts)  # [opponent count, own count]
    return CostGrid(2.0 * marginals.entries @ weights)


def _filler_class(alphabet, target: int) -> int:
    for c in range(len(alphabet)):
        if c != target:
            return c
    raise InvalidInputError("chain alphabet needs a non-target class")


def _check_chain(mix: MixedStrategy, psi: ChainPotentials) -> None:
    if mix.n != psi.n or len(mix.alphabet) != psi.m:
        raise InvalidInputError("strategy and potential dimensions disagree")


class SuffixMaxCache:
    """Memoized backward tables for the budgeted suffix maximization.

    One table per total target count k, holding for every (previous class,
    position t, remaining budget r) the best achievable suffix total of
    potential minus target price, together with the class chosen at t.
    States keep 1 <= t <= n+1 and 0 <= r <= k; positions past the end are
    worth 0 with an exhausted budget and are infeasible otherwise.
    """

    def __init__(self, grid: CostGrid, psi: ChainPotentials, target: int):
        self.grid = grid
        self.psi = psi
        self.target = int(target)
        self.n = psi.n
        self.m = psi.m
        if grid.f.shape != (self.n, self.n):
            raise InvalidInputError("cost grid does not match potential dimensions")
        if not 0 <= self.target < self.m:
            raise InvalidInputError("target class out of range")
        self._tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}

    def _price_column(self, k: int) -> np.ndarray:
        if k == 0:
            return np.zeros(self.n)
        return self.grid.f[:, k - 1]

    def _table(self, k: int):
        cached = self._tables.get(k)
        if cached is not None:
            return cached
        n, m, target = self.n, self.m, self.target
        width = k + 1
        price = self._price_column(k)
        values = np.full((n + 2, m, width), _NEG)
        choices = np.zeros((n + 2, m, width), dtype=np.int64)
        values[n + 1, :, 0] = 0.0
        for t in range(n, 1, -1):
            nxt = values[t + 1]
            uni = self.psi.unigram[t - 1]
            trans = self.psi.transition[t - 2]
            cand = uni[None, :, None] + trans[:, :, None] + nxt[None, :, :]
            shifted = np.full(width, _NEG)
            shifted[1:] = nxt[target, :-1]
            cand[:, target, :] = uni[target] + trans[:, target, None] - price[t - 1] + shifted[None, :]
            values[t] = cand.max(axis=1)
            choices[t] = cand.argmax(axis=1)
        first = self.psi.unigram[0] + self.psi.start
        nxt = values[2]
        cand = first[:, None] + nxt
        shifted = np.full(width, _NEG)
        shifted[1:] = nxt[target, :-1]
        cand[target, :] = first[target] - price[0] + shifted
        start_values = cand.max(axis=0)
        start_choices = cand.argmax(axis=0)
        table = (values, choices, start_values, start_choices)
        self._tables[k] = table
        return table

    def _validate_key(self, prev: int | None, t: int, r: int, k: int) -> None:
        if not 0 <= r <= k <= self.n:
            raise InvalidInputError(f"budget key out of range: r={r}, k={k}, n={self.n}")
        if not 1 <= t <= self.n + 1:
            raise InvalidInputError(f"position out of range: t={t}")
        if t == 1:
            if prev is not None:
                raise InvalidInputError("position 1 is entered from the start state only")
        elif t <= self.n and not (isinstance(prev, int) and 0 <= prev < self.m):
            raise InvalidInputError(f"previous class out of range: {prev!r}")

    def value(self, prev: int | None, t: int, r: int, k: int) -> float:
        self._validate_key(prev, t, r, k)
        if t > self.n:
            return 0.0 if r <= 0 else _NEG
        values, _, start_values, _ = self._table(k)
        if t == 1:
            return float(start_values[r])
        return float(values[t, prev, r])

    def suffix(self, prev: int | None, t: int, r: int, k: int) -> tuple[tuple[int, ...], float]:
        """Best suffix tags from position t and its value; empty on infeasible."""
        val = self.value(prev, t, r, k)
        if not np.isfinite(val):
            return (), val
        values, choices, _, start_choices = self._table(k)
        tags: list[int] = []
        cur_t, cur_r, cur_prev = t, r, prev
        while cur_t <= self.n:
            c = int(start_choices[cur_r]) if cur_t == 1 else int(choices[cur_t, cur_prev, cur_r])
            tags.append(c)
            if c == self.target:
                cur_r -= 1
            cur_prev = c
            cur_t += 1
        return tuple(tags), val


def suffix_max(
    prev_class: int | None,
    t: int,
    r: int,
    k: int,
    grid: CostGrid,
    psi: ChainPotentials,
    target: int,
) -> tuple[tuple[int, ...], float]:
    """Best suffix with exactly ``r`` remaining target tags out of ``k`` total."""
    return SuffixMaxCache(grid, psi, target).suffix(prev_class, t, r, k)


def adversary_response(
    predictor_mix: MixedStrategy, psi: ChainPotentials, target: int
) -> tuple[LabelSequence, float]:
    """Exact minimizer of expected F1 minus potential over all sequences."""
    _check_chain(predictor_mix, psi)
    marg = marginal_count_matrix(predictor_mix, target)
    cache = SuffixMaxCache(cost_grid(marg), psi, target)
    n = psi.n
    best_val = _NEG
    best_tags: tuple[int, ...] = ()
    for k in range(n + 1):
        tags, val = cache.suffix(None, 1, k, k)
        if k == 0:
            val -= marg.empty_mass
        if val > best_val:
            best_val = val
            best_tags = tags
    seq = LabelSequence(best_tags, predictor_mix.alphabet)
    return seq, -best_val


def predictor_response(adversary_mix: MixedStrategy, target: int) -> tuple[LabelSequence, float]:
    """Exact maximizer of expected F1; potentials are constants here."""
    marg = marginal_count_matrix(adversary_mix, target)
    grid = cost_grid(marg)
    n = marg.n
    best_val = marg.empty_mass  # the empty mask scores only against empty responses
    best_positions: np.ndarray = np.empty(0, dtype=np.int64)
    for k in range(1, n + 1):
        col = grid.f[:, k - 1]
        order = np.argsort(-col, kind="stable")
        positions = np.sort(order[:k])
        val = float(col[positions].sum())
        if val > best_val:
            best_val = val
            best_positions = positions
    alphabet = adversary_mix.alphabet
    tags = np.full(n, _filler_class(alphabet, target), dtype=np.int64)
    tags[best_positions] = target
    return LabelSequence(tuple(tags), alphabet), float(best_val)


def expected_f1(mix: MixedStrategy, response: LabelSequence, target: int) -> float:
    """Expected F1 between a mixed strategy and one fixed sequence (F1 is symmetric)."""
    return float(sum(p * f1_score(seq, response, target) for seq, p in mix.items() if p > 0.0))


def _combined_steps(psi: ChainPotentials) -> tuple[np.ndarray, np.ndarray]:
    first = psi.unigram[0] + psi.start
    later = psi.unigram[1:, None, :] + psi.transition if psi.n > 1 else psi.transition
    return first, later


def _rescale_steps(first: np.ndarray, later: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Affine map of the combined step-potential range onto [-1, 1]."""
    flat = np.concatenate([first.ravel(), later.ravel()])
    lo, hi = float(flat.min()), float(flat.max())
    if hi == lo:
        return first, later
    scale = 2.0 / (hi - lo)
    offset = -1.0 - scale * lo
    return scale * first + offset, scale * later + offset


def _viterbi_max(first: np.ndarray, later: np.ndarray, rewards: np.ndarray) -> tuple[int, ...]:
    n, m = rewards.shape
    alpha = first + rewards[0]
    back: list[np.ndarray] = []
    for t in range(1, n):
        cand = alpha[:, None] + later[t - 1]
        back.append(cand.argmax(axis=0))
        alpha = cand.max(axis=0) + rewards[t]
    tags = [int(np.argmax(alpha))]
    for bp in reversed(back):
        tags.append(int(bp[tags[-1]]))
    return tuple(reversed(tags))


def approx_adversary_response(
    predictor_mix: MixedStrategy, psi: ChainPotentials, target: int
) -> tuple[LabelSequence, float]:
    """Cost-sensitive Viterbi approximation of the adversary response.

    One forward pass per cost ratio rewards disagreement with the opponent's
    per-position target marginal; every candidate is then re-scored under
    the true expected F1 minus potential and the lowest wins. The returned
    value upper-bounds the exact minimum.
    """
    _check_chain(predictor_mix, psi)
    p_target = position_marginal(predictor_mix, target)
    first, later = _rescale_steps(*_combined_steps(psi))
    n, m = psi.n, psi.m
    best_seq: LabelSequence | None = None
    best_obj = np.inf
    seen: set[tuple[int, ...]] = set()
    for w in COST_RATIO_GRID:
        false_pos, false_neg = w, 2.0 - w
        rewards = np.tile(p_target[:, None] * false_neg, (1, m))
        rewards[:, target] = (1.0 - p_target) * false_pos
        tags = _viterbi_max(first, later, rewards)
        if tags in seen:
            continue
        seen.add(tags)
        seq = LabelSequence(tags, predictor_mix.alphabet)
        obj = expected_f1(predictor_mix, seq, target) - lagrangian(seq, psi)
        if obj < best_obj:
            best_obj = obj
            best_seq = seq
    assert best_seq is not None
    return best_seq, float(best_obj)


def approx_predictor_response(
    adversary_mix: MixedStrategy, target: int
) -> tuple[LabelSequence, float]:
    """Thresholded position-wise approximation of the predictor response."""
    p_target = position_marginal(adversary_mix, target)
    alphabet = adversary_mix.alphabet
    filler = _filler_class(alphabet, target)
    n = adversary_mix.n
    best_seq: LabelSequence | None = None
    best_val = -np.inf
    seen: set[bytes] = set()
    for w in COST_RATIO_GRID:
        mask = p_target * (2.0 - w) > (1.0 - p_target) * w
        key = mask.tobytes()
        if key in seen:
            continue
        seen.add(key)
        tags = np.full(n, filler, dtype=np.int64)
        tags[mask] = target
        seq = LabelSequence(tuple(tags), alphabet)
        val = expected_f1(adversary_mix, seq, target)
        if val > best_val:
            best_val = val
            best_seq = seq
    assert best_seq is not None
    return best_seq, float(best_val)


class F1Oracle:
    """Best-response oracle for the chain F1 game; values are net payoffs."""

    def __init__(self, target: int, mode: str = "exact"):
        if mode not in ("exact", "approximate"):
            raise InvalidInputError(f"unknown best-response mode: {mode!r}")
        self.target = int(target)
        self.mode = mode
        self.exact = mode == "exact"

    def predictor_br(self, adversary_mix: MixedStrategy, psi: ChainPotentials):
        if self.exact:
            seq, val = predictor_response(adversary_mix, self.target)
        else:
            seq, val = approx_predictor_response(adversary_mix, self.target)
        return seq, val - expected_lagrangian(adversary_mix, psi)

    def adversary_br(self, predictor_mix: MixedStrategy, psi: ChainPotentials):
        if self.exact:
            return adversary_response(predictor_mix, psi, self.target)
        return approx_adversary_response(predictor_mix, psi, self.target)
