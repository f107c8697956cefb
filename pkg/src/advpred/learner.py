"""Parameter estimation for the adversarial prediction games.

Per example, the learning objective is the gold sequence's potential plus
the game value at the current weights. That function is concave in the
weights (the game value is a minimum of affine functions of them), and a
supergradient is the gold feature vector minus the feature expectation
under the adversary's equilibrium mixture. Training runs stochastic ascent
on the L2-regularized objective, one game per example per epoch, with each
example's strategy sets carried over between epochs to warm-start the next
solve.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field, replace

from . import br_aer, br_bipartite, br_fscore, features
from .br_bipartite import BipartiteOracle, CostFunction
from .core import (
    ADVERSARY_TAGS,
    LabelSequence,
    MixedStrategy,
    PotentialTable,
    TagAlphabet,
)
from .data_io import AlignmentExample, ChainExample, chain_class_alphabet
from .double_oracle import GameSolution, OracleGameConfig, run_double_oracle
from .errors import ConfigError, InvalidInputError, SolverFailureError
from .features import FeatureVector, accumulate, dot

log = logging.getLogger(__name__)

TASKS = ("chain-f1", "align-aer", "align-bip")
OPTIMIZERS = ("adadelta", "sgd-decay")
BR_MODES = ("exact", "approximate")

_DEFAULT_TEMPLATES = {"chain-f1": "chain-basic", "align-aer": "align-basic", "align-bip": "align-basic"}


@dataclass
class TrainConfig:
    task: str = "chain-f1"
    target_class: str | None = None
    lam: float = 1e-3
    optimizer: str = "adadelta"
    learning_rate: float = 0.5
    rho: float = 0.95
    eps: float = 1e-6
    epochs: int = 5
    seed: int = 0
    br_mode: str = "exact"
    do_tol: float = 1e-6
    do_max_iterations: int = 500
    template_set: str = ""
    cost: CostFunction = field(default_factory=CostFunction)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task: {self.task!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer: {self.optimizer!r}")
        if self.br_mode not in BR_MODES:
            raise ConfigError(f"unknown best-response mode: {self.br_mode!r}")
        if self.lam < 0.0:
            raise ConfigError("the L2 coefficient must be nonnegative")
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")
        if self.do_tol <= 0.0 or self.do_max_iterations < 1:
            raise ConfigError("bad double-oracle controls")
        if self.task == "chain-f1" and not self.target_class:
            raise ConfigError("chain-f1 training needs a target class")
        if not self.template_set:
            self.template_set = _DEFAULT_TEMPLATES[self.task]


@dataclass
class TrainedModel:
    """A weight vector plus everything needed to rebuild its games."""

    weights: dict[str, float]
    task: str
    template_set: str
    target_class: str | None
    classes: tuple[str, ...]
    metadata: dict[str, str] = field(default_factory=dict)


class GameRunner:
    """Builds and solves one example's game for a given weight vector."""

    def __init__(
        self,
        task: str,
        *,
        classes: tuple[str, ...] = (),
        target_class: str | None = None,
        template_set: str = "",
        cost: CostFunction | None = None,
        br_mode: str = "exact",
        do_tol: float = 1e-6,
        do_max_iterations: int = 500,
    ):
        if task not in TASKS:
            raise ConfigError(f"unknown task: {task!r}")
        self.task = task
        self.br_mode = br_mode
        self.do_tol = do_tol
        self.do_max_iterations = do_max_iterations
        self.cost = cost or CostFunction()
        self.template_set = template_set or _DEFAULT_TEMPLATES[task]
        if task == "chain-f1":
            if not classes or target_class is None:
                raise ConfigError("chain games need the class list and a target class")
            self.alphabet = TagAlphabet(tuple(classes))
            self.target = self.alphabet.index(target_class)
            self.templates = features.chain_templates(self.template_set)
        else:
            self.alphabet = ADVERSARY_TAGS
            self.target = None
            if self.template_set not in features.ALIGN_TEMPLATE_SETS:
                raise ConfigError(f"unknown alignment template set: {self.template_set!r}")

    @classmethod
    def for_dataset(cls, dataset, cfg: TrainConfig) -> "GameRunner":
        classes: tuple[str, ...] = ()
        if cfg.task == "chain-f1":
            required = (cfg.target_class,) if cfg.target_class else ()
            classes = chain_class_alphabet(dataset, required).names
            if len(classes) < 2:
                raise ConfigError("chain training needs at least two classes")
        return cls(
            cfg.task,
            classes=classes,
            target_class=cfg.target_class,
            template_set=cfg.template_set,
            cost=cfg.cost,
            br_mode=cfg.br_mode,
            do_tol=cfg.do_tol,
            do_max_iterations=cfg.do_max_iterations,
        )

    @classmethod
    def for_model(cls, model: TrainedModel, *, do_tol: float = 1e-6, do_max_iterations: int = 500) -> "GameRunner":
        return cls(
            model.task,
            classes=model.classes,
            target_class=model.target_class,
            template_set=model.template_set,
            br_mode="exact",  # prediction always uses exact responses
            do_tol=do_tol,
            do_max_iterations=do_max_iterations,
        )

    # -- per-example pieces ------------------------------------------------

    def gold(self, example) -> LabelSequence:
        if self.task == "chain-f1":
            return LabelSequence.from_names(example.tags, self.alphabet)
        return example.gold_sequence()

    def potentials(self, weights, example) -> PotentialTable:
        if self.task == "chain-f1":
            return features.chain_potentials(weights, example.tokens, self.alphabet, self.templates)
        return features.alignment_potentials(weights, example.source, example.target, example.ext_scores)

    def global_features(self, example, seq: LabelSequence) -> FeatureVector:
        if self.task == "chain-f1":
            return features.chain_global_features(example.tokens, seq, self.templates)
        return features.alignment_global_features(example.source, example.target, seq, example.ext_scores)

    def oracle(self, example):
        if self.task == "chain-f1":
            return br_fscore.F1Oracle(self.target, self.br_mode)
        if self.task == "align-aer":
            return br_aer.AerOracle()
        return BipartiteOracle(self.cost, example.constraint)

    def _initial_sets(self, example, psi) -> tuple[tuple[LabelSequence, ...], tuple[LabelSequence, ...]]:
        gold = self.gold(example)
        gold_mass = MixedStrategy.point_mass(gold)
        if self.task == "chain-f1":
            pred, _ = br_fscore.predictor_response(gold_mass, self.target)
        elif self.task == "align-aer":
            pred, _ = br_aer.predictor_response(gold_mass)
        else:
            pred, _ = br_bipartite.predictor_response(gold_mass, self.cost, example.constraint)
        return (pred,), (gold,)

    def game_config(self, example, psi, warm=None) -> OracleGameConfig:
        if warm is not None:
            init_pred, init_adv = warm
        else:
            init_pred, init_adv = self._initial_sets(example, psi)
        kind = {"chain-f1": "f1", "align-aer": "aer", "align-bip": "bipartite"}[self.task]
        return OracleGameConfig(
            score_kind=kind,
            psi=psi,
            initial_predictor=tuple(init_pred),
            initial_adversary=tuple(init_adv),
            target=self.target,
            cost=self.cost if kind == "bipartite" else None,
            convergence_tol=self.do_tol,
            max_iterations=self.do_max_iterations,
        )

    def solve(self, weights, example, warm=None) -> GameSolution:
        psi = self.potentials(weights, example)
        return run_double_oracle(self.game_config(example, psi, warm), self.oracle(example))

    def predict(self, weights, example) -> LabelSequence:
        """Exact best response to the adversary's equilibrium mixture."""
        solution = self.solve(weights, example)
        adv = solution.adversary_mix
        if self.task == "chain-f1":
            seq, _ = br_fscore.predictor_response(adv, self.target)
        elif self.task == "align-aer":
            seq, _ = br_aer.predictor_response(adv)
        else:
            seq, _ = br_bipartite.predictor_response(adv, self.cost, example.constraint)
        return seq

    def subgradient(self, weights, example, warm=None) -> tuple[FeatureVector, float, GameSolution]:
        """Supergradient of the example objective and the objective itself."""
        solution = self.solve(weights, example, warm)
        if not solution.certified and self.br_mode == "exact":
            log.warning("uncertified equilibrium after %d iterations; using it anyway", solution.iterations)
        gold_feats = self.global_features(example, self.gold(example))
        grad = dict(gold_feats)
        for seq, prob in solution.adversary_mix.items():
            if prob > 1e-15:
                accumulate(grad, self.global_features(example, seq), -prob)
        objective = dot(weights, gold_feats) + solution.value
        return grad, objective, solution


def example_subgradient(
    weights: dict[str, float],
    example,
    cfg: TrainConfig,
    classes: tuple[str, ...] = (),
) -> tuple[FeatureVector, float]:
    """One-shot subgradient; ``classes`` fixes the chain alphabet if given."""
    if cfg.task == "chain-f1" and not classes:
        runner = GameRunner.for_dataset([example], cfg)
    else:
        runner = GameRunner(
            cfg.task,
            classes=classes,
            target_class=cfg.target_class,
            template_set=cfg.template_set,
            cost=cfg.cost,
            br_mode=cfg.br_mode,
            do_tol=cfg.do_tol,
            do_max_iterations=cfg.do_max_iterations,
        )
    grad, objective, _ = runner.subgradient(weights, example)
    return grad, objective


class _AdaDelta:
    def __init__(self, rho: float, eps: float):
        self.rho = rho
        self.eps = eps
        self.sq_grad: dict[str, float] = {}
        self.sq_step: dict[str, float] = {}

    def step(self, weights: dict[str, float], grad: FeatureVector) -> None:
        rho, eps = self.rho, self.eps
        for key, g in grad.items():
            acc = self.sq_grad.get(key, 0.0) * rho + (1.0 - rho) * g * g
            self.sq_grad[key] = acc
            delta = math.sqrt((self.sq_step.get(key, 0.0) + eps) / (acc + eps)) * g
            self.sq_step[key] = self.sq_step.get(key, 0.0) * rho + (1.0 - rho) * delta * delta
            weights[key] = weights.get(key, 0.0) + delta


class _SgdDecay:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate
        self.updates = 0

    def step(self, weights: dict[str, float], grad: FeatureVector) -> None:
        self.updates += 1
        rate = self.learning_rate / math.sqrt(self.updates)
        for key, g in grad.items():
            weights[key] = weights.get(key, 0.0) + rate * g


def _make_optimizer(cfg: TrainConfig):
    if cfg.optimizer == "adadelta":
        return _AdaDelta(cfg.rho, cfg.eps)
    return _SgdDecay(cfg.learning_rate)


def _ascent_direction(grad: FeatureVector, weights: dict[str, float], lam: float) -> FeatureVector:
    direction = dict(grad)
    if lam > 0.0:
        for key, value in weights.items():
            direction[key] = direction.get(key, 0.0) - lam * value
    return direction


def train(dataset, cfg: TrainConfig) -> tuple[TrainedModel, list[float]]:
    """Stochastic regularized ascent; returns the model and per-epoch objectives.

    Deterministic for a fixed config and seed: examples are shuffled by a
    seeded generator and updates apply sequentially.
    """
    if not dataset:
        raise InvalidInputError("training needs a non-empty dataset")
    runner = GameRunner.for_dataset(dataset, cfg)
    weights: dict[str, float] = {}
    optimizer = _make_optimizer(cfg)
    rng = random.Random(cfg.seed)
    warm: dict[int, tuple[tuple[LabelSequence, ...], tuple[LabelSequence, ...]]] = {}
    trace: list[float] = []
    for epoch in range(cfg.epochs):
        order = list(range(len(dataset)))
        rng.shuffle(order)
        total = 0.0
        for idx in order:
            grad, objective, solution = runner.subgradient(weights, dataset[idx], warm.get(idx))
            if not math.isfinite(objective):
                raise SolverFailureError(
                    f"objective diverged (epoch {epoch + 1}, example {idx}): {objective!r}"
                )
            warm[idx] = (solution.predictor_mix.support, solution.adversary_mix.support)
            total += objective
            optimizer.step(weights, _ascent_direction(grad, weights, cfg.lam))
        trace.append(float(total) / len(dataset))
    model = TrainedModel(
        weights=weights,
        task=cfg.task,
        template_set=cfg.template_set,
        target_class=cfg.target_class,
        classes=runner.alphabet.names if cfg.task == "chain-f1" else (),
        metadata={
            "epochs": str(cfg.epochs),
            "seed": str(cfg.seed),
            "lambda": repr(cfg.lam),
            "optimizer": cfg.optimizer,
            "br_mode": cfg.br_mode,
            "final_objective": repr(trace[-1]),
        },
    )
    return model, trace


def full_batch_train(dataset, cfg: TrainConfig, steps: int) -> tuple[dict[str, float], list[float]]:
    """Plain full-batch subgradient ascent with a 1/sqrt(t) schedule.

    Kept for the convexity and suboptimality checks; returns the weights
    and the regularized objective after every step (step 0 included).
    """
    runner = GameRunner.for_dataset(dataset, cfg)
    weights: dict[str, float] = {}
    trace = [regularized_objective(weights, dataset, cfg, runner)]
    for step in range(1, steps + 1):
        mean_grad: FeatureVector = {}
        for example in dataset:
            grad, _, _ = runner.subgradient(weights, example)
            accumulate(mean_grad, grad, 1.0 / len(dataset))
        direction = _ascent_direction(mean_grad, weights, cfg.lam)
        rate = cfg.learning_rate / math.sqrt(step)
        for key, g in direction.items():
            weights[key] = weights.get(key, 0.0) + rate * g
        trace.append(regularized_objective(weights, dataset, cfg, runner))
    return weights, trace


def regularized_objective(weights, dataset, cfg: TrainConfig, runner: GameRunner | None = None) -> float:
    runner = runner or GameRunner.for_dataset(dataset, cfg)
    total = 0.0
    for example in dataset:
        _, objective, _ = runner.subgradient(weights, example)
        total += objective
    penalty = 0.5 * cfg.lam * sum(v * v for v in weights.values())
    return total / len(dataset) - penalty


def predict(model: TrainedModel, example) -> LabelSequence:
    """Solve the example's game with exact responses and answer the equilibrium."""
    _check_example(model, example)
    return GameRunner.for_model(model).predict(model.weights, example)


def _check_example(model: TrainedModel, example) -> None:
    if model.task == "chain-f1" and not isinstance(example, ChainExample):
        raise InvalidInputError("this model predicts tagged sentences")
    if model.task in ("align-aer", "align-bip") and not isinstance(example, AlignmentExample):
        raise InvalidInputError("this model predicts alignment grids")


# -- model files ----------------------------------------------------------

_MODEL_HEADER = "advpred-model v1"


def model_to_text(model: TrainedModel) -> str:
    """Key-sorted, self-describing text form; byte-deterministic."""
    lines = [
        _MODEL_HEADER,
        f"task = {model.task}",
        f"template_set = {model.template_set}",
        f"target_class = {model.target_class or '-'}",
        f"classes = {' '.join(model.classes) if model.classes else '-'}",
    ]
    for key in sorted(model.metadata):
        lines.append(f"meta.{key} = {model.metadata[key]}")
    lines.append("[weights]")
    for key in sorted(model.weights):
        value = model.weights[key]
        if value != 0.0:
            lines.append(f"{key}\t{value!r}")
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> TrainedModel:
    lines = text.splitlines()
    if not lines or lines[0] != _MODEL_HEADER:
        raise InvalidInputError("not a recognizable model file")
    fields: dict[str, str] = {}
    metadata: dict[str, str] = {}
    weights: dict[str, float] = {}
    in_weights = False
    for line in lines[1:]:
        if not line.strip():
            continue
        if line == "[weights]":
            in_weights = True
            continue
        if in_weights:
            try:
                key, value = line.split("\t")
                weights[key] = float(value)
            except ValueError:
                raise InvalidInputError(f"bad weight line: {line!r}") from None
        else:
            try:
                key, value = (part.strip() for part in line.split("=", 1))
            except ValueError:
                raise InvalidInputError(f"bad header line: {line!r}") from None
            if key.startswith("meta."):
                metadata[key[5:]] = value
            else:
                fields[key] = value
    for required in ("task", "template_set", "target_class", "classes"):
        if required not in fields:
            raise InvalidInputError(f"model file is missing {required!r}")
    if fields["task"] not in TASKS:
        raise InvalidInputError(f"unknown task in model file: {fields['task']!r}")
    return TrainedModel(
        weights=weights,
        task=fields["task"],
        template_set=fields["template_set"],
        target_class=None if fields["target_class"] == "-" else fields["target_class"],
        classes=() if fields["classes"] == "-" else tuple(fields["classes"].split()),
        metadata=metadata,
    )


def save_model(model: TrainedModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(model_to_text(model))


def load_model(path: str) -> TrainedModel:
    with open(path, encoding="utf-8") as handle:
        return model_from_text(handle.read())
