"""End-to-end self-checks runnable from the CLI.

Each suite replays a slice of the verification battery against the
brute-force references: the published worked examples, randomized
best-response equivalences, and double-oracle certification. Suites whose
enumeration cost exceeds the budget are reported as skipped, never as
passed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import br_aer, br_bipartite, br_fscore, oracle
from .br_bipartite import CostFunction, MatchingConstraint
from .core import (
    ADVERSARY_TAGS,
    NOLINK,
    NULL,
    PREDICTOR_TAGS,
    AlignmentPotentials,
    ChainPotentials,
    LabelSequence,
    MixedStrategy,
    TagAlphabet,
    aer_score,
)
from .double_oracle import OracleGameConfig, run_double_oracle

DEFAULT_BUDGET = 2_000_000

#: The published two-edge game: adversary rows by name, predictor columns.
PUBLISHED_GAME = {
    "NN": {"NN": 1, "NA": 0, "AN": 0, "AA": 0},
    "NP": {"NN": 1, "NA": 1, "AN": 0, "AA": Fraction(1, 2)},
    "NS": {"NN": 0, "NA": 1, "AN": 0, "AA": Fraction(2, 3)},
    "PN": {"NN": 1, "NA": 0, "AN": 1, "AA": Fraction(1, 2)},
    "PP": {"NN": 1, "NA": 1, "AN": 1, "AA": 1},
    "PS": {"NN": 0, "NA": 1, "AN": Fraction(1, 2), "AA": 1},
    "SN": {"NN": 0, "NA": 0, "AN": 1, "AA": Fraction(2, 3)},
    "SP": {"NN": 0, "NA": Fraction(1, 2), "AN": 1, "AA": 1},
    "SS": {"NN": 0, "NA": Fraction(2, 3), "AN": Fraction(2, 3), "AA": 1},
}

#: The published five-source, eight-target worked alignment example.
WORKED_EXAMPLE_GOLD = "SNNNNNNN" "NSNNNNNN" "NNSNNNNN" "NNNPSNNN" "NNNNNPSP"
WORKED_EXAMPLE_PROPOSED = "ANNNNNNN" "NANNNNNN" "NNNANNNN" "NNNAANAN" "NNNANNNA"
WORKED_EXAMPLE_AER = Fraction(5, 13)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    status: str  # PASS | FAIL | SKIP
    detail: str


def _random_mix(alphabet: TagAlphabet, n: int, rng, max_support: int = 5) -> MixedStrategy:
    m = len(alphabet)
    k = int(rng.integers(1, min(max_support, m**n) + 1))
    seen: set[tuple[int, ...]] = set()
    support: list[LabelSequence] = []
    while len(support) < k:
        tags = tuple(int(x) for x in rng.integers(0, m, n))
        if tags not in seen:
            seen.add(tags)
            support.append(LabelSequence(tags, alphabet))
    return MixedStrategy.normalized(support, rng.random(k) + 0.01)


def _random_chain_psi(n: int, m: int, rng, scale: float = 1.0) -> ChainPotentials:
    return ChainPotentials(
        rng.uniform(-scale, scale, (n, m)),
        rng.uniform(-scale, scale, m),
        rng.uniform(-scale, scale, (n - 1, m, m)) if n > 1 else np.zeros((0, m, m)),
    )


def _suite_worked_example() -> str:
    gold = LabelSequence.from_names(WORKED_EXAMPLE_GOLD, ADVERSARY_TAGS)
    proposed = LabelSequence.from_names(WORKED_EXAMPLE_PROPOSED, PREDICTOR_TAGS)
    got = aer_score(proposed, gold)
    if got != float(WORKED_EXAMPLE_AER):
        raise AssertionError(f"worked example scored {got!r}, want {WORKED_EXAMPLE_AER}")
    return f"aer = {got!r}"


def _suite_published_matrix() -> str:
    full = oracle.exhaustive_equilibrium("aer", AlignmentPotentials.zeros(2))
    worst = 0.0
    for r, pred in enumerate(full.predictor_space):
        for c, adv in enumerate(full.adversary_space):
            want = float(PUBLISHED_GAME["".join(adv.names())]["".join(pred.names())])
            worst = max(worst, abs(full.matrix[r, c] - want))
    if worst > 1e-12:
        raise AssertionError(f"matrix deviates by {worst!r}")
    return f"36 entries, worst deviation {worst!r}"


def _suite_f1_minimizer(rng, trials: int) -> str:
    for _ in range(trials):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(2, 4))
        alphabet = TagAlphabet(tuple(f"K{i}" for i in range(m)))
        target = int(rng.integers(0, m))
        mix = _random_mix(alphabet, n, rng)
        psi = _random_chain_psi(n, m, rng)
        _, fast = br_fscore.adversary_response(mix, psi, target)
        _, slow = oracle.exhaustive_br(mix, "f1", psi, "adversary", target=target)
        if abs(fast - slow) > 1e-9:
            raise AssertionError(f"minimizer {fast!r} vs enumeration {slow!r} (n={n}, m={m})")
    return f"{trials} randomized instances"


def _suite_f1_maximizer(rng, trials: int) -> str:
    for _ in range(trials):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(2, 4))
        alphabet = TagAlphabet(tuple(f"K{i}" for i in range(m)))
        target = int(rng.integers(0, m))
        mix = _random_mix(alphabet, n, rng)
        _, fast = br_fscore.predictor_response(mix, target)
        _, slow = oracle.exhaustive_br(mix, "f1", ChainPotentials.zeros(n, m), "predictor", target=target)
        if abs(fast - slow) > 1e-9:
            raise AssertionError(f"maximizer {fast!r} vs enumeration {slow!r} (n={n}, m={m})")
    return f"{trials} randomized instances"


def _suite_aer_adversary(rng, trials: int) -> str:
    for trial in range(trials):
        n = int(rng.integers(1, 8))
        mix = _random_mix(PREDICTOR_TAGS, n, rng)
        if trial % 3 == 0:
            empty = LabelSequence((NULL,) * n, PREDICTOR_TAGS)
            if all(s.tags != empty.tags for s in mix.support):
                support = mix.support + (empty,)
                mix = MixedStrategy.normalized(support, list(mix.probs) + [0.3])
        psi = AlignmentPotentials(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n))
        _, fast = br_aer.adversary_response(mix, psi)
        _, slow = oracle.exhaustive_br(mix, "aer", psi, "adversary")
        if abs(fast - slow) > 1e-9:
            raise AssertionError(f"adversary {fast!r} vs enumeration {slow!r} (n={n})")
    return f"{trials} randomized instances"


def _suite_aer_predictor(rng, trials: int) -> str:
    for trial in range(trials):
        n = int(rng.integers(1, 8))
        mix = _random_mix(ADVERSARY_TAGS, n, rng)
        if trial % 3 == 0:
            empty = LabelSequence((NOLINK,) * n, ADVERSARY_TAGS)
            if all(s.tags != empty.tags for s in mix.support):
                support = mix.support + (empty,)
                mix = MixedStrategy.normalized(support, list(mix.probs) + [0.3])
        _, fast = br_aer.predictor_response(mix)
        _, slow = oracle.exhaustive_br(mix, "aer", AlignmentPotentials.zeros(n), "predictor")
        if abs(fast - slow) > 1e-9:
            raise AssertionError(f"predictor {fast!r} vs enumeration {slow!r} (n={n})")
    return f"{trials} randomized instances"


def _random_feasible_mix(constraint: MatchingConstraint, side: str, rng) -> MixedStrategy:
    if side == "predictor":
        grids = oracle._matching_predictor_grids(constraint)
        alphabet = PREDICTOR_TAGS
    else:
        grids = oracle._matching_adversary_grids(constraint)
        alphabet = ADVERSARY_TAGS
    k = int(rng.integers(1, min(4, len(grids)) + 1))
    idx = rng.choice(len(grids), size=k, replace=False)
    support = [LabelSequence(tuple(grids[i]), alphabet) for i in idx]
    return MixedStrategy.normalized(support, rng.random(k) + 0.01)


def _suite_bipartite(rng, trials: int) -> str:
    for trial in range(trials):
        constraint = MatchingConstraint(int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        n = constraint.n
        cost = CostFunction() if trial % 2 == 0 else CostFunction(
            *(float(x) for x in np.round(rng.uniform(0.0, 1.5, 6), 3))
        )
        psi = AlignmentPotentials(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n))
        amix = _random_feasible_mix(constraint, "adversary", rng)
        pmix = _random_feasible_mix(constraint, "predictor", rng)
        _, fast = br_bipartite.predictor_response(amix, cost, constraint)
        _, slow = oracle.exhaustive_br(amix, "bipartite", psi, "predictor", cost=cost, constraint=constraint)
        if abs(fast - slow) > 1e-9:
            raise AssertionError(f"predictor {fast!r} vs enumeration {slow!r}")
        _, fast = br_bipartite.adversary_response(pmix, cost, psi, constraint)
        _, slow = oracle.exhaustive_br(pmix, "bipartite", psi, "adversary", cost=cost, constraint=constraint)
        if abs(fast - slow) > 1e-9:
            raise AssertionError(f"adversary {fast!r} vs enumeration {slow!r}")
    return f"{trials} randomized instances"


def _suite_double_oracle(rng, trials: int) -> str:
    tol = 1e-8
    for trial in range(trials):
        if trial % 2 == 0:
            n = int(rng.integers(1, 5))
            psi = AlignmentPotentials(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n))
            full = oracle.exhaustive_equilibrium("aer", psi)
            game_oracle = br_aer.AerOracle()
            cfg = OracleGameConfig(
                "aer",
                psi,
                (LabelSequence((NULL,) * n, PREDICTOR_TAGS),),
                (LabelSequence((NOLINK,) * n, ADVERSARY_TAGS),),
                convergence_tol=tol,
            )
        else:
            n = int(rng.integers(1, 5))
            m = int(rng.integers(2, 4))
            alphabet = TagAlphabet(tuple(f"K{i}" for i in range(m)))
            target = int(rng.integers(0, m))
            psi = _random_chain_psi(n, m, rng)
            full = oracle.exhaustive_equilibrium("f1", psi, alphabet=alphabet, target=target)
            game_oracle = br_fscore.F1Oracle(target)
            filler = next(c for c in range(m) if c != target)
            start = LabelSequence((filler,) * n, alphabet)
            cfg = OracleGameConfig("f1", psi, (start,), (start,), target=target, convergence_tol=tol)
        solution = run_double_oracle(cfg, game_oracle)
        if not solution.certified:
            raise AssertionError(f"uncertified on trial {trial}")
        if abs(solution.value - full.value) > 1e-6 or solution.gap > 2 * tol:
            raise AssertionError(
                f"value {solution.value!r} vs {full.value!r}, gap {solution.gap!r}"
            )
    return f"{trials} randomized games"


def _suite_approximation(rng, trials: int) -> str:
    agree = 0
    for _ in range(trials):
        n = int(rng.integers(2, 8))
        m = int(rng.integers(2, 4))
        alphabet = TagAlphabet(tuple(f"K{i}" for i in range(m)))
        target = int(rng.integers(0, m))
        mix = _random_mix(alphabet, n, rng)
        psi = _random_chain_psi(n, m, rng, scale=0.25)
        eseq, exact = br_fscore.adversary_response(mix, psi, target)
        aseq, approx = br_fscore.approx_adversary_response(mix, psi, target)
        if approx < exact - 1e-12:
            raise AssertionError(f"approximation below the exact minimum: {approx!r} < {exact!r}")
        if aseq.tags == eseq.tags:
            agree += 1
        _, pe = br_fscore.predictor_response(mix, target)
        _, pa = br_fscore.approx_predictor_response(mix, target)
        if pa > pe + 1e-12:
            raise AssertionError(f"approximation above the exact maximum: {pa!r} > {pe!r}")
    return f"{trials} instances, argmin agreement {agree / trials:.2f}"


@dataclass(frozen=True)
class _Suite:
    name: str
    cost: int  # estimated payoff evaluations
    run: Callable[[np.random.Generator], str]


def _suites(trials_scale: float = 1.0) -> list[_Suite]:
    def scaled(n: int) -> int:
        return max(5, int(n * trials_scale))

    return [
        _Suite("core.aer_score worked example", 20, lambda rng: _suite_worked_example()),
        _Suite("oracle.exhaustive_equilibrium published 4x9 game", 40, lambda rng: _suite_published_matrix()),
        _Suite("br_fscore.adversary_response vs enumeration", 1_700_000,
               lambda rng: _suite_f1_minimizer(rng, scaled(50))),
        _Suite("br_fscore.predictor_response vs enumeration", 70_000,
               lambda rng: _suite_f1_maximizer(rng, scaled(50))),
        _Suite("br_aer.adversary_response vs enumeration", 700_000,
               lambda rng: _suite_aer_adversary(rng, scaled(60))),
        _Suite("br_aer.predictor_response vs enumeration", 50_000,
               lambda rng: _suite_aer_predictor(rng, scaled(60))),
        _Suite("br_bipartite responses vs enumeration", 60_000,
               lambda rng: _suite_bipartite(rng, scaled(40))),
        _Suite("double_oracle certification vs full matrices", 600_000,
               lambda rng: _suite_double_oracle(rng, scaled(30))),
        _Suite("br_fscore approximation soundness", 900_000,
               lambda rng: _suite_approximation(rng, scaled(40))),
    ]


def run_suites(budget: int = DEFAULT_BUDGET, seed: int = 0) -> list[SuiteResult]:
    results = []
    for suite in _suites():
        if suite.cost > budget:
            results.append(SuiteResult(suite.name, "SKIP", f"cost ~{suite.cost} exceeds budget {budget}"))
            continue
        rng = np.random.default_rng(seed)
        try:
            detail = suite.run(rng)
        except AssertionError as exc:
            results.append(SuiteResult(suite.name, "FAIL", str(exc)))
        else:
            results.append(SuiteResult(suite.name, "PASS", detail))
    return results
