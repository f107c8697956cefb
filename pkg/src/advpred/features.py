"""Sparse feature extraction and potential assembly.

Feature vectors are plain dicts from interned string ids to values. Ids are
namespaced by weight block: unigram features live in per-class blocks
("u:<class>:<feature>"), transition features in per-class-pair blocks
("b:<prev>|<class>:<feature>", with "^" for the virtual start state), and
alignment-edge features in the sure/possible blocks ("S:<feature>",
"R:<feature>"). Extraction is deterministic, and summing the per-position
vectors of a sequence reproduces its potential exactly:

    lagrangian(seq, potentials(w, x)) == dot(w, global_features(x, seq))
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .core import AlignmentPotentials, ChainPotentials, LabelSequence, POSSIBLE, SURE, TagAlphabet
from .errors import InvalidInputError

FeatureVector = dict[str, float]

START_MARK = "^"


def dot(weights: Mapping[str, float], feats: Mapping[str, float]) -> float:
    if len(weights) < len(feats):
        weights, feats = feats, weights
    return float(sum(v * weights.get(k, 0.0) for k, v in feats.items()))


def accumulate(acc: dict[str, float], feats: Mapping[str, float], scale: float = 1.0) -> None:
    for k, v in feats.items():
        acc[k] = acc.get(k, 0.0) + scale * v


def word_shape(token: str) -> str:
    return "".join("X" if ch.isupper() else "x" if ch.islower() else "d" if ch.isdigit() else ch for ch in token)


@dataclass(frozen=True)
class ChainTemplates:
    """Named bundle of chain observation and transition templates."""

    name: str
    token_features: Callable[[tuple[str, ...], int], list[tuple[str, float]]]
    transition_features: Callable[[int], list[tuple[str, float]]]


def _basic_token_features(tokens: tuple[str, ...], t: int) -> list[tuple[str, float]]:
    tok = tokens[t - 1]
    feats = [
        (f"w={tok}", 1.0),
        (f"lw={tok.lower()}", 1.0),
        (f"shape={word_shape(tok)}", 1.0),
    ]
    for i in range(1, min(4, len(tok)) + 1):
        feats.append((f"pre{i}={tok[:i]}", 1.0))
        feats.append((f"suf{i}={tok[-i:]}", 1.0))
    feats.append((f"prev={tokens[t - 2] if t > 1 else '<s>'}", 1.0))
    feats.append((f"next={tokens[t] if t < len(tokens) else '</s>'}", 1.0))
    if t == 1:
        feats.append(("first", 1.0))
    if t == len(tokens):
        feats.append(("last", 1.0))
    return feats


def _basic_transition_features(t: int) -> list[tuple[str, float]]:
    return [("1", 1.0)]


def _tabular_token_features(tokens: tuple[str, ...], t: int) -> list[tuple[str, float]]:
    return [(f"t={t}:w={tokens[t - 1]}", 1.0)]


def _tabular_transition_features(t: int) -> list[tuple[str, float]]:
    return [(f"t={t}", 1.0)]


CHAIN_TEMPLATES: dict[str, ChainTemplates] = {
    "chain-basic": ChainTemplates("chain-basic", _basic_token_features, _basic_transition_features),
    # Position-keyed indicators; with distinct per-position contexts these pin
    # the adversary's pairwise moments, which is what the consistency desk
    # tests need.
    "chain-tabular": ChainTemplates("chain-tabular", _tabular_token_features, _tabular_transition_features),
}


def chain_templates(name: str) -> ChainTemplates:
    try:
        return CHAIN_TEMPLATES[name]
    except KeyError:
        raise InvalidInputError(f"unknown chain template set: {name!r}") from None


def extract_chain(
    tokens: tuple[str, ...],
    t: int,
    c_prev: int | None,
    c: int,
    alphabet: TagAlphabet,
    templates: ChainTemplates,
) -> FeatureVector:
    """Features of taking class c at 1-indexed position t after c_prev."""
    if not 1 <= t <= len(tokens):
        raise InvalidInputError(f"position {t} outside 1..{len(tokens)}")
    cls = alphabet.names[c]
    prev = START_MARK if c_prev is None else alphabet.names[c_prev]
    out: FeatureVector = {}
    for suffix, value in templates.token_features(tokens, t):
        out[f"u:{cls}:{suffix}"] = out.get(f"u:{cls}:{suffix}", 0.0) + value
    for suffix, value in templates.transition_features(t):
        key = f"b:{prev}|{cls}:{suffix}"
        out[key] = out.get(key, 0.0) + value
    return out


def chain_potentials(
    weights: Mapping[str, float],
    tokens: tuple[str, ...],
    alphabet: TagAlphabet,
    templates: ChainTemplates,
) -> ChainPotentials:
    """Contract the weight vector against every position's features."""
    n, m = len(tokens), len(alphabet)
    unigram = np.zeros((n, m))
    for t in range(1, n + 1):
        feats = templates.token_features(tokens, t)
        for c, cls in enumerate(alphabet.names):
            unigram[t - 1, c] = sum(v * weights.get(f"u:{cls}:{sfx}", 0.0) for sfx, v in feats)
    start = np.zeros(m)
    for sfx, v in templates.transition_features(1):
        for c, cls in enumerate(alphabet.names):
            start[c] += v * weights.get(f"b:{START_MARK}|{cls}:{sfx}", 0.0)
    transition = np.zeros((max(n - 1, 0), m, m))
    for t in range(2, n + 1):
        for sfx, v in templates.transition_features(t):
            for cp, prev in enumerate(alphabet.names):
                for c, cls in enumerate(alphabet.names):
                    transition[t - 2, cp, c] += v * weights.get(f"b:{prev}|{cls}:{sfx}", 0.0)
    return ChainPotentials(unigram, start, transition)


def chain_global_features(
    tokens: tuple[str, ...],
    seq: LabelSequence,
    templates: ChainTemplates,
) -> FeatureVector:
    if len(seq) != len(tokens):
        raise InvalidInputError("sequence length does not match the token count")
    acc: FeatureVector = {}
    prev: int | None = None
    for t, c in enumerate(seq.tags, start=1):
        accumulate(acc, extract_chain(tokens, t, prev, c, seq.alphabet, templates))
        prev = c
    return acc


def align_edge_features(
    source: tuple[str, ...],
    target: tuple[str, ...],
    i: int,
    j: int,
    ext_score: float | None = None,
) -> list[tuple[str, float]]:
    """Observation features of the (source i, target j) edge, 1-indexed."""
    src, tgt = source[i - 1], target[j - 1]
    feats = [
        (f"pair={src}|{tgt}", 1.0),
        ("dist", abs(i / len(source) - j / len(target))),
    ]
    if src == tgt:
        feats.append(("ident", 1.0))
    if ext_score is not None:
        feats.append(("ext", float(ext_score)))
    return feats


ALIGN_TEMPLATE_SETS = ("align-basic",)


def alignment_potentials(
    weights: Mapping[str, float],
    source: tuple[str, ...],
    target: tuple[str, ...],
    ext_scores: tuple[float, ...] | None = None,
) -> AlignmentPotentials:
    n = len(source) * len(target)
    sure = np.zeros(n)
    possible = np.zeros(n)
    pos = 0
    for i in range(1, len(source) + 1):
        for j in range(1, len(target) + 1):
            ext = ext_scores[pos] if ext_scores is not None else None
            for sfx, v in align_edge_features(source, target, i, j, ext):
                sure[pos] += v * weights.get(f"S:{sfx}", 0.0)
                possible[pos] += v * weights.get(f"R:{sfx}", 0.0)
            pos += 1
    return AlignmentPotentials(sure, possible)


def alignment_global_features(
    source: tuple[str, ...],
    target: tuple[str, ...],
    seq: LabelSequence,
    ext_scores: tuple[float, ...] | None = None,
) -> FeatureVector:
    n = len(source) * len(target)
    if len(seq) != n:
        raise InvalidInputError("sequence length does not match the edge grid")
    acc: FeatureVector = {}
    pos = 0
    for i in range(1, len(source) + 1):
        for j in range(1, len(target) + 1):
            tag = seq.tags[pos]
            if tag in (SURE, POSSIBLE):
                block = "S" if tag == SURE else "R"
                ext = ext_scores[pos] if ext_scores is not None else None
                for sfx, v in align_edge_features(source, target, i, j, ext):
                    key = f"{block}:{sfx}"
                    acc[key] = acc.get(key, 0.0) + v
            pos += 1
    return acc
