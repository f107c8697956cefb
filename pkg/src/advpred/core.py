"""Game-theoretic sequence primitives.

Tag alphabets, label sequences, mixed strategies, per-position count
marginals, Lagrangian potential tables, and the two exact multivariate
score functions (per-class F1 over chains, alignment error rate over
sure/possible alignment grids) including their 0/0 conventions.

Alignment grids are always flattened row-major (source-major): the edge
(source i, target j), 1-indexed, lands at sequence position
(i - 1) * n_target + (j - 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidInputError

CHAIN = "chain"
ALIGN_ADVERSARY = "align-adversary"
ALIGN_PREDICTOR = "align-predictor"

_ROLES = (CHAIN, ALIGN_ADVERSARY, ALIGN_PREDICTOR)

#: Probability-mass slack tolerated when validating mixed strategies.
PROB_TOL = 1e-9


@dataclass(frozen=True)
class TagAlphabet:
    """Ordered list of distinct tag names.

    The role pins the cardinality and naming of alignment alphabets:
    the adversary tags an edge sure/possible/none, the predictor either
    links an edge or leaves it alone.
    """

    names: tuple[str, ...]
    role: str = CHAIN

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        if not self.names:
            raise InvalidInputError("alphabet must contain at least one tag")
        if len(set(self.names)) != len(self.names):
            raise InvalidInputError(f"duplicate tag names: {self.names}")
        if self.role not in _ROLES:
            raise InvalidInputError(f"unknown alphabet role: {self.role!r}")
        if self.role == ALIGN_ADVERSARY and self.names != ("S", "P", "N"):
            raise InvalidInputError("adversary alignment alphabet is (S, P, N)")
        if self.role == ALIGN_PREDICTOR and self.names != ("A", "N"):
            raise InvalidInputError("predictor alignment alphabet is (A, N)")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidInputError(f"tag {name!r} not in alphabet {self.names}") from None


ADVERSARY_TAGS = TagAlphabet(("S", "P", "N"), ALIGN_ADVERSARY)
PREDICTOR_TAGS = TagAlphabet(("A", "N"), ALIGN_PREDICTOR)

SURE, POSSIBLE, NOLINK = 0, 1, 2  # indices into ADVERSARY_TAGS
LINK, NULL = 0, 1  # indices into PREDICTOR_TAGS


@dataclass(frozen=True)
class LabelSequence:
    """A fixed-length sequence of tag indices into one alphabet."""

    tags: tuple[int, ...]
    alphabet: TagAlphabet

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(int(t) for t in self.tags))
        if not self.tags:
            raise InvalidInputError("label sequence must be non-empty")
        m = len(self.alphabet)
        if any(t < 0 or t >= m for t in self.tags):
            raise InvalidInputError(f"tag index out of range for {m}-tag alphabet: {self.tags}")

    @classmethod
    def from_names(cls, names: Iterable[str], alphabet: TagAlphabet) -> "LabelSequence":
        return cls(tuple(alphabet.index(n) for n in names), alphabet)

    def __len__(self) -> int:
        return len(self.tags)

    def names(self) -> tuple[str, ...]:
        return tuple(self.alphabet.names[t] for t in self.tags)

    def count(self, tag: int) -> int:
        return sum(1 for t in self.tags if t == tag)

    def mask(self, tag: int) -> np.ndarray:
        return np.fromiter((t == tag for t in self.tags), dtype=bool, count=len(self.tags))


@dataclass(frozen=True)
class MixedStrategy:
    """A finite-support probability distribution over label sequences."""

    support: tuple[LabelSequence, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not self.support:
            raise InvalidInputError("mixed strategy needs a non-empty support")
        if len(self.support) != len(self.probs):
            raise InvalidInputError("support and probability lengths differ")
        first = self.support[0]
        for seq in self.support:
            if len(seq) != len(first) or seq.alphabet != first.alphabet:
                raise InvalidInputError("support sequences must share length and alphabet")
        if len({s.tags for s in self.support}) != len(self.support):
            raise InvalidInputError("support sequences must be pairwise distinct")
        if any(p < 0.0 for p in self.probs):
            raise InvalidInputError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > PROB_TOL:
            raise InvalidInputError(f"probabilities sum to {sum(self.probs)!r}, not 1")

    @classmethod
    def point_mass(cls, seq: LabelSequence) -> "MixedStrategy":
        return cls((seq,), (1.0,))

    @classmethod
    def normalized(cls, support: Sequence[LabelSequence], weights: Sequence[float]) -> "MixedStrategy":
        """Clip tiny negative weights (LP round-off) and renormalize."""
        w = np.maximum(np.asarray(weights, dtype=float), 0.0)
        total = w.sum()
        if total <= 0.0:
            raise InvalidInputError("weights have no positive mass")
        return cls(tuple(support), tuple(w / total))

    @property
    def n(self) -> int:
        return len(self.support[0])

    @property
    def alphabet(self) -> TagAlphabet:
        return self.support[0].alphabet

    def items(self):
        return zip(self.support, self.probs)


@dataclass(frozen=True)
class MarginalCountMatrix:
    """Joint (position, total-count) marginals of one tag under a mixed strategy.

    ``entries[i, k]`` is the probability that the strategy's sequence carries
    the tag at position i+1 and carries exactly k+1 copies of it in total.
    The zero-count probability lives in ``empty_mass`` rather than a k=0
    column because every consumer treats it specially.
    """

    entries: np.ndarray  # shape (n, n), counts 1..n along axis 1
    empty_mass: float

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", e)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise InvalidInputError("count-marginal matrix must be square")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def marginal_count_matrix(strategy: MixedStrategy, target: int) -> MarginalCountMatrix:
    """Collect per-position, per-total-count marginals of ``target`` tags."""
    n = strategy.n
    entries = np.zeros((n, n))
    empty = 0.0
    for seq, prob in strategy.items():
        mask = seq.mask(target)
        k = int(mask.sum())
        if k == 0:
            empty += prob
        else:
            entries[mask, k - 1] += prob
    return MarginalCountMatrix(entries, empty)


@dataclass(frozen=True)
class ChainPotentials:
    """Per-position unigram and transition potentials for a linear chain.

    ``unigram[t, c]`` scores class c at position t+1; ``start[c]`` is the
    transition potential from the virtual start state into position 1;
    ``transition[t, c_prev, c]`` covers positions t+2 (so it has n-1 slabs).
    """

    unigram: np.ndarray  # (n, m)
    start: np.ndarray  # (m,)
    transition: np.ndarray  # (n - 1, m, m)

    def __post_init__(self):
        uni = np.asarray(self.unigram, dtype=float)
        start = np.asarray(self.start, dtype=float)
        trans = np.asarray(self.transition, dtype=float)
        object.__setattr__(self, "unigram", uni)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "transition", trans)
        if uni.ndim != 2:
            raise InvalidInputError("unigram potentials must be (n, m)")
        n, m = uni.shape
        if start.shape != (m,):
            raise InvalidInputError("start potentials must have one entry per class")
        if trans.shape != (max(n - 1, 0), m, m):
            raise InvalidInputError("transition potentials must be (n-1, m, m)")
        for a in (uni, start, trans):
            if not np.all(np.isfinite(a)):
                raise InvalidInputError("potentials must be finite")

    @classmethod
    def zeros(cls, n: int, m: int) -> "ChainPotentials":
        return cls(np.zeros((n, m)), np.zeros(m), np.zeros((max(n - 1, 0), m, m)))

    @property
    def n(self) -> int:
        return self.unigram.shape[0]

    @property
    def m(self) -> int:
        return self.unigram.shape[1]

    def step(self, t: int, c_prev: int | None, c: int) -> float:
        """Combined potential of taking class c at 1-indexed position t."""
        if t == 1:
            return float(self.unigram[0, c] + self.start[c])
        return float(self.unigram[t - 1, c] + self.transition[t - 2, c_prev, c])


@dataclass(frozen=True)
class AlignmentPotentials:
    """Per-edge potentials for sure and possible-only tags; no-link costs 0."""

    sure: np.ndarray  # (n,)
    possible: np.ndarray  # (n,)

    def __post_init__(self):
        s = np.asarray(self.sure, dtype=float)
        r = np.asarray(self.possible, dtype=float)
        object.__setattr__(self, "sure", s)
        object.__setattr__(self, "possible", r)
        if s.ndim != 1 or s.shape != r.shape:
            raise InvalidInputError("sure/possible potentials must be equal-length vectors")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(r))):
            raise InvalidInputError("potentials must be finite")

    @classmethod
    def zeros(cls, n: int) -> "AlignmentPotentials":
        return cls(np.zeros(n), np.zeros(n))

    @property
    def n(self) -> int:
        return self.sure.shape[0]


PotentialTable = Union[ChainPotentials, AlignmentPotentials]


def lagrangian(seq: LabelSequence, psi: PotentialTable) -> float:
    """Total potential of a sequence under a potential table."""
    if isinstance(psi, ChainPotentials):
        if len(seq) != psi.n or len(seq.alphabet) != psi.m:
            raise InvalidInputError("sequence does not match chain potential dimensions")
        tags = seq.tags
        total = psi.unigram[0, tags[0]] + psi.start[tags[0]]
        for t in range(1, len(tags)):
            total += psi.unigram[t, tags[t]] + psi.transition[t - 1, tags[t - 1], tags[t]]
        return float(total)
    if isinstance(psi, AlignmentPotentials):
        if len(seq) != psi.n:
            raise InvalidInputError("sequence does not match alignment potential length")
        if seq.alphabet.role != ALIGN_ADVERSARY:
            raise InvalidInputError("alignment potentials apply to adversary sequences")
        total = 0.0
        for i, t in enumerate(seq.tags):
            if t == SURE:
                total += psi.sure[i]
            elif t == POSSIBLE:
                total += psi.possible[i]
        return float(total)
    raise InvalidInputError(f"unsupported potential table type: {type(psi).__name__}")


def expected_lagrangian(mix: MixedStrategy, psi: PotentialTable) -> float:
    return float(sum(p * lagrangian(seq, psi) for seq, p in mix.items() if p > 0.0))


def f1_score(pred: LabelSequence, gold: LabelSequence, target: int) -> float:
    """Per-class F1 of ``pred`` against ``gold``; 1.0 when neither carries the class."""
    if len(pred) != len(gold):
        raise InvalidInputError(f"length mismatch: {len(pred)} vs {len(gold)}")
    if pred.alphabet != gold.alphabet:
        raise InvalidInputError("F1 requires a shared chain alphabet")
    inter = sum(1 for p, g in zip(pred.tags, gold.tags) if p == target and g == target)
    denom = pred.count(target) + gold.count(target)
    if denom == 0:
        return 1.0
    return 2.0 * inter / denom


def aer_score(pred: LabelSequence, gold: LabelSequence) -> float:
    """Alignment error rate of a linked/unlinked grid against a sure/possible grid.

    Sure tags also count as possible. An empty denominator (no predicted
    links and no sure tags) scores a perfect 0.
    """
    if len(pred) != len(gold):
        raise InvalidInputError(f"length mismatch: {len(pred)} vs {len(gold)}")
    if pred.alphabet.role != ALIGN_PREDICTOR or gold.alphabet.role != ALIGN_ADVERSARY:
        raise InvalidInputError("AER compares a predictor grid against an adversary grid")
    match_sure = 0
    match_poss = 0
    for p, g in zip(pred.tags, gold.tags):
        if p == LINK:
            if g == SURE:
                match_sure += 1
                match_poss += 1
            elif g == POSSIBLE:
                match_poss += 1
    denom = pred.count(LINK) + gold.count(SURE)
    if denom == 0:
        return 0.0
    return (denom - (match_sure + match_poss)) / denom


def position_marginal(mix: MixedStrategy, tag: int) -> np.ndarray:
    """Per-position probability that the strategy carries ``tag``."""
    out = np.zeros(mix.n)
    for seq, prob in mix.items():
        if prob > 0.0:
            out[seq.mask(tag)] += prob
    return out
