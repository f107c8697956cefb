"""Run configuration: a documented key-value file with env and flag overrides.

Config files hold one ``key = value`` per line; blank lines and ``#``
comments are ignored; unknown keys are rejected. Every key can also be set
through the environment as ``ADVPRED_<KEY>`` (uppercased, dots becoming
underscores) or through CLI flags. Precedence: defaults < file < env < CLI.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from typing import Mapping

from .br_bipartite import CostFunction
from .errors import ConfigError
from .learner import BR_MODES, OPTIMIZERS, TASKS, TrainConfig

ENV_PREFIX = "ADVPRED_"


@dataclass
class RunConfig:
    """Everything a batch command needs, fully validated up front."""

    task: str = "chain-f1"
    # chain data
    train_data: str = ""
    eval_data: str = ""
    # alignment data (sentence pairs + gold tags + optional edge scores)
    train_pairs: str = ""
    train_gold: str = ""
    train_scores: str = ""
    eval_pairs: str = ""
    eval_gold: str = ""
    eval_scores: str = ""
    # artifacts
    model_in: str = ""
    model_out: str = ""
    predictions: str = ""
    trace_out: str = ""
    report_out: str = ""
    # training controls
    target_class: str = ""
    epochs: int = 5
    lam: float = 1e-3
    optimizer: str = "adadelta"
    learning_rate: float = 0.5
    rho: float = 0.95
    eps: float = 1e-6
    seed: int = 0
    br_mode: str = "exact"
    do_tol: float = 1e-6
    do_max_iterations: int = 500
    template_set: str = ""
    jobs: int = 1
    report_bayes_gap: bool = False
    # matching cost overrides
    cost_link_sure: float = 0.0
    cost_link_possible: float = 0.0
    cost_link_none: float = 1.0
    cost_skip_sure: float = 1.0
    cost_skip_possible: float = 0.0
    cost_skip_none: float = 0.0

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task: {self.task!r} (expected one of {TASKS})")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer: {self.optimizer!r}")
        if self.br_mode not in BR_MODES:
            raise ConfigError(f"unknown br_mode: {self.br_mode!r}")
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")
        if self.lam < 0.0:
            raise ConfigError("lambda must be nonnegative")
        if self.do_tol <= 0.0:
            raise ConfigError("do_tol must be positive")
        if self.do_max_iterations < 1:
            raise ConfigError("do_max_iterations must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")

    def cost(self) -> CostFunction:
        return CostFunction(
            link_sure=self.cost_link_sure,
            link_possible=self.cost_link_possible,
            link_none=self.cost_link_none,
            skip_sure=self.cost_skip_sure,
            skip_possible=self.cost_skip_possible,
            skip_none=self.cost_skip_none,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            task=self.task,
            target_class=self.target_class or None,
            lam=self.lam,
            optimizer=self.optimizer,
            learning_rate=self.learning_rate,
            rho=self.rho,
            eps=self.eps,
            epochs=self.epochs,
            seed=self.seed,
            br_mode=self.br_mode,
            do_tol=self.do_tol,
            do_max_iterations=self.do_max_iterations,
            template_set=self.template_set,
            cost=self.cost(),
        )


# File/env key -> dataclass field. Dotted names keep the file format tidy.
_KEY_TO_FIELD = {
    "task": "task",
    "train_data": "train_data",
    "eval_data": "eval_data",
    "train_pairs": "train_pairs",
    "train_gold": "train_gold",
    "train_scores": "train_scores",
    "eval_pairs": "eval_pairs",
    "eval_gold": "eval_gold",
    "eval_scores": "eval_scores",
    "model_in": "model_in",
    "model_out": "model_out",
    "predictions": "predictions",
    "trace_out": "trace_out",
    "report_out": "report_out",
    "target_class": "target_class",
    "epochs": "epochs",
    "lambda": "lam",
    "optimizer": "optimizer",
    "learning_rate": "learning_rate",
    "rho": "rho",
    "eps": "eps",
    "seed": "seed",
    "br_mode": "br_mode",
    "do_tol": "do_tol",
    "do_max_iterations": "do_max_iterations",
    "template_set": "template_set",
    "jobs": "jobs",
    "report_bayes_gap": "report_bayes_gap",
    "cost.link_sure": "cost_link_sure",
    "cost.link_possible": "cost_link_possible",
    "cost.link_none": "cost_link_none",
    "cost.skip_sure": "cost_skip_sure",
    "cost.skip_possible": "cost_skip_possible",
    "cost.skip_none": "cost_skip_none",
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, field_name: str, raw: str):
    kind = _FIELD_TYPES[field_name]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def _env_name(key: str) -> str:
    return ENV_PREFIX + key.upper().replace(".", "_")


def parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _KEY_TO_FIELD:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def load_run_config(
    path: str | None = None,
    overrides: Mapping[str, str] | None = None,
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """Assemble a validated RunConfig from file, environment, and overrides."""
    env = os.environ if env is None else env
    merged: dict[str, str] = {}
    if path:
        merged.update(parse_config_file(path))
    for key in _KEY_TO_FIELD:
        env_value = env.get(_env_name(key))
        if env_value is not None:
            merged[key] = env_value
    for key, value in (overrides or {}).items():
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"unknown config key {key!r}")
        merged[key] = value
    kwargs = {
        _KEY_TO_FIELD[key]: _coerce(key, _KEY_TO_FIELD[key], value) for key, value in merged.items()
    }
    return RunConfig(**kwargs)
