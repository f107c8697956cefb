"""Dataset readers and writers, synthetic data, and evaluation reports.

File formats (all plain text, UTF-8, deterministic):

* Chain data: CoNLL-style columns. One token per line, whitespace-separated
  columns with the token first and the tag last; middle columns ride along
  untouched. Blank lines separate sentences. B-/I- tag prefixes collapse to
  the plain class name on read.
* Sentence pairs: one line per pair, ``id ||| source tokens ||| target
  tokens``.
* Alignment tags: records ``id source_index target_index flag`` with
  1-indexed positions and flag S or P; absent edges are N; a duplicated
  edge keeps the last flag and warns. Predicted links use flag A in the
  same record shape.
* Edge scores (optional): records ``id source_index target_index value``.

Grids flatten row-major: edge (i, j) sits at (i-1) * n_target + (j-1).

Corpus-level metrics pool match and denominator counts across sentences
(they are not means of per-sentence scores).
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass

from .br_bipartite import MatchingConstraint
from .core import ADVERSARY_TAGS, LINK, PREDICTOR_TAGS, LabelSequence, TagAlphabet
from .errors import DataFormatError, InvalidInputError

_BIO_PREFIXES = ("B-", "I-")


@dataclass(frozen=True)
class ChainExample:
    """One tagged sentence."""

    tokens: tuple[str, ...]
    tags: tuple[str, ...]
    extras: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        if not self.tokens or len(self.tokens) != len(self.tags):
            raise InvalidInputError("tokens and tags must be non-empty and equal-length")
        if self.extras and len(self.extras) != len(self.tokens):
            raise InvalidInputError("extra columns must cover every token")


@dataclass(frozen=True)
class AlignmentExample:
    """One sentence pair with a sure/possible/none tag per edge."""

    pair_id: str
    source: tuple[str, ...]
    target: tuple[str, ...]
    tags: tuple[str, ...]
    ext_scores: tuple[float, ...] | None = None

    def __post_init__(self):
        n = len(self.source) * len(self.target)
        if not self.source or not self.target:
            raise InvalidInputError("source and target sentences must be non-empty")
        if len(self.tags) != n:
            raise InvalidInputError("tag grid does not match the sentence dimensions")
        if any(t not in ("S", "P", "N") for t in self.tags):
            raise InvalidInputError("alignment tags must be S, P, or N")
        if self.ext_scores is not None and len(self.ext_scores) != n:
            raise InvalidInputError("edge scores must cover the whole grid")

    @property
    def constraint(self) -> MatchingConstraint:
        return MatchingConstraint(len(self.source), len(self.target))

    def gold_sequence(self) -> LabelSequence:
        return LabelSequence.from_names(self.tags, ADVERSARY_TAGS)


def collapse_bio(tag: str) -> str:
    for prefix in _BIO_PREFIXES:
        if tag.startswith(prefix):
            return tag[len(prefix):]
    return tag


def read_conll(path: str) -> list[ChainExample]:
    examples: list[ChainExample] = []
    tokens: list[str] = []
    tags: list[str] = []
    extras: list[tuple[str, ...]] = []

    def flush():
        if tokens:
            examples.append(ChainExample(tuple(tokens), tuple(tags), tuple(extras)))
            tokens.clear()
            tags.clear()
            extras.clear()

    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                flush()
                continue
            cols = line.split()
            if len(cols) < 2:
                raise DataFormatError(f"{path}:{lineno}: expected token and tag columns, got {len(cols)}")
            tokens.append(cols[0])
            tags.append(collapse_bio(cols[-1]))
            extras.append(tuple(cols[1:-1]))
    flush()
    return examples


def write_conll(examples: list[ChainExample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for ex in examples:
            ex_extras = ex.extras or tuple(() for _ in ex.tokens)
            for token, extra, tag in zip(ex.tokens, ex_extras, ex.tags):
                handle.write("\t".join((token, *extra, tag)) + "\n")
            handle.write("\n")


def chain_class_alphabet(examples: list[ChainExample], required: tuple[str, ...] = ()) -> TagAlphabet:
    """Deterministic chain alphabet: the sorted union of observed class names."""
    names = sorted(set(required).union(*[set(ex.tags) for ex in examples] or [set()]))
    return TagAlphabet(tuple(names))


def _parse_pairs(path: str) -> list[tuple[str, tuple[str, ...], tuple[str, ...]]]:
    pairs = []
    seen_ids = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split("|||")]
            if len(parts) != 3:
                raise DataFormatError(f"{path}:{lineno}: expected 'id ||| source ||| target'")
            pair_id, source, target = parts[0], tuple(parts[1].split()), tuple(parts[2].split())
            if not pair_id or not source or not target:
                raise DataFormatError(f"{path}:{lineno}: empty id or sentence")
            if pair_id in seen_ids:
                raise DataFormatError(f"{path}:{lineno}: duplicate sentence id {pair_id!r}")
            seen_ids.add(pair_id)
            pairs.append((pair_id, source, target))
    return pairs


def _read_edge_records(path: str, pairs: dict[str, tuple[int, int]], flags: tuple[str, ...]):
    """Yield (pair_id, position, flag_or_value) for 'id i j x' records."""
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            cols = line.split()
            if len(cols) != 4:
                raise DataFormatError(f"{path}:{lineno}: expected 'id i j value' records")
            pair_id = cols[0]
            if pair_id not in pairs:
                raise DataFormatError(f"{path}:{lineno}: unknown sentence id {pair_id!r}")
            ns, nt = pairs[pair_id]
            try:
                i, j = int(cols[1]), int(cols[2])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: positions must be integers") from None
            if not (1 <= i <= ns and 1 <= j <= nt):
                raise DataFormatError(
                    f"{path}:{lineno}: edge ({i},{j}) outside the {ns}x{nt} grid of {pair_id!r}"
                )
            value = cols[3]
            if flags and value not in flags:
                raise DataFormatError(f"{path}:{lineno}: flag must be one of {flags}, got {value!r}")
            yield pair_id, (i - 1) * nt + (j - 1), value, lineno


def read_alignments(pairs_path: str, gold_path: str, scores_path: str | None = None) -> list[AlignmentExample]:
    pairs = _parse_pairs(pairs_path)
    dims = {pid: (len(src), len(tgt)) for pid, src, tgt in pairs}
    tags: dict[str, dict[int, str]] = {pid: {} for pid in dims}
    for pid, pos, flag, lineno in _read_edge_records(gold_path, dims, ("S", "P")):
        if pos in tags[pid]:
            warnings.warn(f"{gold_path}:{lineno}: duplicate edge record; last flag wins")
        tags[pid][pos] = flag
    scores: dict[str, dict[int, float]] | None = None
    if scores_path is not None:
        scores = {pid: {} for pid in dims}
        for pid, pos, value, lineno in _read_edge_records(scores_path, dims, ()):
            try:
                scores[pid][pos] = float(value)
            except ValueError:
                raise DataFormatError(f"{scores_path}:{lineno}: score must be a number") from None
    out = []
    for pid, src, tgt in pairs:
        n = len(src) * len(tgt)
        grid = tuple(tags[pid].get(pos, "N") for pos in range(n))
        ext = tuple(scores[pid].get(pos, 0.0) for pos in range(n)) if scores is not None else None
        out.append(AlignmentExample(pid, src, tgt, grid, ext))
    return out


def write_alignment_pairs(examples: list[AlignmentExample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for ex in examples:
            handle.write(f"{ex.pair_id} ||| {' '.join(ex.source)} ||| {' '.join(ex.target)}\n")


def write_alignment_gold(examples: list[AlignmentExample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for ex in examples:
            nt = len(ex.target)
            for pos, tag in enumerate(ex.tags):
                if tag != "N":
                    handle.write(f"{ex.pair_id} {pos // nt + 1} {pos % nt + 1} {tag}\n")


def write_alignment_scores(examples: list[AlignmentExample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for ex in examples:
            if ex.ext_scores is None:
                continue
            nt = len(ex.target)
            for pos, value in enumerate(ex.ext_scores):
                handle.write(f"{ex.pair_id} {pos // nt + 1} {pos % nt + 1} {value!r}\n")


def write_alignment_links(
    examples: list[AlignmentExample], predictions: list[LabelSequence], path: str
) -> None:
    """Write predicted link grids as gold-shaped records with flag A."""
    if len(examples) != len(predictions):
        raise InvalidInputError("one prediction per example is required")
    with open(path, "w", encoding="utf-8") as handle:
        for ex, pred in zip(examples, predictions):
            nt = len(ex.target)
            if len(pred) != len(ex.tags):
                raise InvalidInputError(f"prediction grid mismatch for {ex.pair_id!r}")
            for pos, tag in enumerate(pred.tags):
                if tag == LINK:
                    handle.write(f"{ex.pair_id} {pos // nt + 1} {pos % nt + 1} A\n")


def read_alignment_links(path: str, examples: list[AlignmentExample]) -> list[LabelSequence]:
    """Read predicted links back into A/N grids aligned with ``examples``."""
    dims = {ex.pair_id: (len(ex.source), len(ex.target)) for ex in examples}
    links: dict[str, set[int]] = {pid: set() for pid in dims}
    for pid, pos, _flag, _lineno in _read_edge_records(path, dims, ("A", "S", "P")):
        links[pid].add(pos)
    out = []
    for ex in examples:
        n = len(ex.tags)
        out.append(LabelSequence(tuple(0 if p in links[ex.pair_id] else 1 for p in range(n)), PREDICTOR_TAGS))
    return out


def write_chain_predictions(predictions: list[tuple[str, ...]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for tags in predictions:
            handle.write(" ".join(tags) + "\n")


def read_chain_predictions(path: str) -> list[tuple[str, ...]]:
    out = []
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if line:
                out.append(tuple(line.split()))
    return out


def synth_chain(
    seed: int,
    count: int,
    n_range: tuple[int, int] = (5, 9),
    m: int = 2,
    noise: float = 0.1,
    vocab_size: int = 8,
) -> list[ChainExample]:
    """Deterministic synthetic sentences with latent per-class vocabularies.

    A sticky Markov chain draws latent classes; each token comes from its
    class vocabulary ("w<class>_<j>"), except that with probability
    ``noise`` the token is drawn from a random class and, independently,
    the emitted label is corrupted to a random other class. noise = 0 makes
    tokens perfectly predictive of tags.
    """
    if not (0.0 <= noise <= 1.0) or m < 2 or count < 0 or n_range[0] < 1 or n_range[0] > n_range[1]:
        raise InvalidInputError("bad synthetic chain parameters")
    rng = random.Random(seed)
    classes = [f"K{i}" for i in range(m)]
    stay = 0.75
    examples = []
    for _ in range(count):
        n = rng.randint(*n_range)
        latent = [rng.randrange(m)]
        for _ in range(n - 1):
            latent.append(latent[-1] if rng.random() < stay else rng.randrange(m))
        tokens = []
        tags = []
        for z in latent:
            token_class = z if rng.random() >= noise else rng.randrange(m)
            tokens.append(f"w{token_class}_{rng.randrange(vocab_size)}")
            if rng.random() < noise:
                tags.append(classes[rng.choice([c for c in range(m) if c != z])])
            else:
                tags.append(classes[z])
        examples.append(ChainExample(tuple(tokens), tuple(tags)))
    return examples


def synth_align(
    seed: int,
    count: int,
    source_range: tuple[int, int] = (2, 4),
    target_range: tuple[int, int] = (2, 5),
    noise: float = 0.1,
) -> list[AlignmentExample]:
    """Deterministic synthetic sentence pairs with near-diagonal gold links.

    Every source position links to the nearest free target column (so gold
    grids always satisfy the matching constraint); with probability
    ``noise`` a link is tagged P instead of S, and aligned tokens stop
    sharing their surface form. Edge scores are 1 on gold links plus
    uniform noise.
    """
    if not (0.0 <= noise <= 1.0) or count < 0:
        raise InvalidInputError("bad synthetic alignment parameters")
    rng = random.Random(seed)
    examples = []
    for idx in range(count):
        ns = rng.randint(*source_range)
        nt = rng.randint(*target_range)
        src_vocab = [rng.randrange(1000) for _ in range(ns)]
        source = tuple(f"v{v}" for v in src_vocab)
        target_words = [f"u{rng.randrange(1000)}" for _ in range(nt)]
        grid = ["N"] * (ns * nt)
        free = list(range(nt))
        for i in range(ns):
            if not free:
                break
            diag = round((i + 0.5) * nt / ns - 0.5)
            j = min(free, key=lambda col: (abs(col - diag), col))
            free.remove(j)
            grid[i * nt + j] = "P" if rng.random() < noise else "S"
            if rng.random() >= noise:
                target_words[j] = f"v{src_vocab[i]}"
        scores = tuple(
            round((1.0 if grid[pos] != "N" else 0.0) + rng.uniform(-0.3, 0.3), 6)
            for pos in range(ns * nt)
        )
        examples.append(AlignmentExample(f"s{idx}", source, tuple(target_words), tuple(grid), scores))
    return examples


@dataclass(frozen=True)
class Report:
    """Evaluation results: named values plus a printable rendering."""

    values: dict[str, float]
    text: str


def _render_report(rows: list[tuple[str, str]], values: dict[str, float]) -> Report:
    width = max(len(name) for name, _ in rows)
    table = "\n".join(f"{name:<{width}}  {shown}" for name, shown in rows)
    machine = "\n".join(f"{key}={values[key]!r}" for key in sorted(values))
    return Report(values, f"{table}\n\n{machine}\n")


def evaluate_chain(
    predictions: list[tuple[str, ...]],
    golds: list[tuple[str, ...]],
    classes: tuple[str, ...],
) -> Report:
    """Corpus per-class F1 with pooled counts; an absent class scores 1."""
    if len(predictions) != len(golds):
        raise InvalidInputError(f"{len(predictions)} predictions vs {len(golds)} gold sentences")
    inter = {c: 0 for c in classes}
    pred_count = {c: 0 for c in classes}
    gold_count = {c: 0 for c in classes}
    for pred, gold in zip(predictions, golds):
        if len(pred) != len(gold):
            raise InvalidInputError(f"length mismatch: {len(pred)} vs {len(gold)}")
        for p, g in zip(pred, gold):
            if p in pred_count:
                pred_count[p] += 1
            if g in gold_count:
                gold_count[g] += 1
            if p == g and p in inter:
                inter[p] += 1
    values: dict[str, float] = {}
    rows = [("class", "f1")]
    for c in classes:
        denom = pred_count[c] + gold_count[c]
        f1 = 1.0 if denom == 0 else 2.0 * inter[c] / denom
        values[f"f1.{c}"] = f1
        rows.append((c, f"{f1:.4f}"))
    return _render_report(rows, values)


def evaluate_alignment(predictions: list[LabelSequence], examples: list[AlignmentExample]) -> Report:
    """Corpus AER from pooled match and denominator sums."""
    if len(predictions) != len(examples):
        raise InvalidInputError(f"{len(predictions)} predictions vs {len(examples)} sentence pairs")
    links = sures = match_sure = match_poss = 0
    for pred, ex in zip(predictions, examples):
        if len(pred) != len(ex.tags):
            raise InvalidInputError(f"grid mismatch for {ex.pair_id!r}")
        for p, g in zip(pred.tags, ex.tags):
            if p == LINK:
                links += 1
                if g == "S":
                    match_sure += 1
                    match_poss += 1
                elif g == "P":
                    match_poss += 1
        sures += sum(1 for g in ex.tags if g == "S")
    denom = links + sures
    aer = 0.0 if denom == 0 else (denom - match_sure - match_poss) / denom
    values = {
        "aer": aer,
        "links": float(links),
        "sure": float(sures),
        "match_sure": float(match_sure),
        "match_possible": float(match_poss),
    }
    rows = [("metric", "value"), ("aer", f"{aer:.4f}"), ("links", str(links)), ("sure", str(sures))]
    return _render_report(rows, values)
