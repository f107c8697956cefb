"""Batch command-line interface.

Subcommands: train, predict, eval, selftest, bench. Data paths and training
settings come from a ``key = value`` config file (see config.py); ``--seed``,
``--jobs``, ``--br-mode``, ``--lambda``, and ``--target-class`` override it,
as do ``ADVPRED_*`` environment variables. All commands are deterministic
given config and seed, apart from measured timings.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

from . import data_io, learner, oracle
from .bench import format_bench, run_bench
from .br_fscore import expected_f1
from .config import RunConfig, load_run_config
from .core import ChainPotentials, LabelSequence, MixedStrategy, TagAlphabet
from .errors import (
    BudgetExceededError,
    ConfigError,
    DataFormatError,
    InvalidInputError,
    SolverFailureError,
)
from .selftest import DEFAULT_BUDGET, run_suites


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    mapping = {
        "seed": args.seed,
        "jobs": args.jobs,
        "lambda": getattr(args, "lam", None),
        "target_class": args.target_class,
    }
    out = {key: str(value) for key, value in mapping.items() if value is not None}
    if args.br_mode is not None:
        out["br_mode"] = {"exact": "exact", "approx": "approximate"}[args.br_mode]
    return out


def _require_file(path: str, what: str) -> str:
    if not path:
        raise ConfigError(f"config is missing the {what} path")
    import os

    if not os.path.exists(path):
        raise ConfigError(f"{what} path does not exist: {path}")
    return path


def _load_train_dataset(run: RunConfig):
    if run.task == "chain-f1":
        return data_io.read_conll(_require_file(run.train_data, "train_data"))
    return data_io.read_alignments(
        _require_file(run.train_pairs, "train_pairs"),
        _require_file(run.train_gold, "train_gold"),
        _require_file(run.train_scores, "train_scores") if run.train_scores else None,
    )


def _load_eval_dataset(run: RunConfig):
    if run.task == "chain-f1":
        return data_io.read_conll(_require_file(run.eval_data, "eval_data"))
    return data_io.read_alignments(
        _require_file(run.eval_pairs, "eval_pairs"),
        _require_file(run.eval_gold, "eval_gold"),
        _require_file(run.eval_scores, "eval_scores") if run.eval_scores else None,
    )


def _bayes_gap(model: learner.TrainedModel, dataset) -> float:
    """Worst gap between the model's expected score and the enumerated optimum.

    Groups training sentences that share tokens, treats each group's gold
    tags as an empirical conditional distribution, and compares the model's
    prediction against the best scoring mask found by enumeration.
    """
    alphabet = TagAlphabet(model.classes)
    target = alphabet.index(model.target_class)
    groups: dict[tuple[str, ...], dict[tuple[str, ...], int]] = {}
    for ex in dataset:
        groups.setdefault(ex.tokens, {}).setdefault(ex.tags, 0)
        groups[ex.tokens][ex.tags] += 1
    worst = 0.0
    for tokens, tag_counts in groups.items():
        total = sum(tag_counts.values())
        support = [LabelSequence.from_names(tags, alphabet) for tags in tag_counts]
        mix = MixedStrategy(tuple(support), tuple(c / total for c in tag_counts.values()))
        n = len(tokens)
        _, bayes = oracle.exhaustive_br(
            mix, "f1", ChainPotentials.zeros(n, len(alphabet)), "predictor", target=target
        )
        prediction = learner.predict(model, data_io.ChainExample(tokens, next(iter(tag_counts))))
        worst = max(worst, bayes - expected_f1(mix, prediction, target))
    return worst


def cmd_train(args: argparse.Namespace) -> int:
    run = load_run_config(args.config, _overrides(args))
    dataset = _load_train_dataset(run)
    if not run.model_out:
        raise ConfigError("config is missing model_out")
    model, trace = learner.train(dataset, run.train_config())
    learner.save_model(model, run.model_out)
    trace_path = run.trace_out or run.model_out + ".trace"
    with open(trace_path, "w", encoding="utf-8") as handle:
        for epoch, value in enumerate(trace, start=1):
            handle.write(f"{epoch}\t{value!r}\n")
    print(f"wrote {run.model_out} ({len(model.weights)} weights) and {trace_path}")
    print(f"final_objective={trace[-1]!r}")
    if run.report_bayes_gap:
        if run.task != "chain-f1":
            raise ConfigError("report_bayes_gap applies to chain-f1 runs only")
        print(f"bayes_gap={_bayes_gap(model, dataset)!r}")
    return 0


def _predict_one(payload):
    model, example = payload
    return learner.predict(model, example)


def cmd_predict(args: argparse.Namespace) -> int:
    run = load_run_config(args.config, _overrides(args))
    model = learner.load_model(_require_file(run.model_in, "model_in"))
    if model.task != run.task:
        raise ConfigError(f"model task {model.task!r} does not match configured task {run.task!r}")
    dataset = _load_eval_dataset(run)
    if not run.predictions:
        raise ConfigError("config is missing the predictions path")
    if run.jobs > 1:
        with ProcessPoolExecutor(max_workers=run.jobs) as pool:
            predictions = list(pool.map(_predict_one, [(model, ex) for ex in dataset]))
    else:
        predictions = [learner.predict(model, ex) for ex in dataset]
    if run.task == "chain-f1":
        data_io.write_chain_predictions([p.names() for p in predictions], run.predictions)
    else:
        data_io.write_alignment_links(dataset, predictions, run.predictions)
    print(f"wrote {run.predictions} ({len(predictions)} sequences)")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    run = load_run_config(args.config, _overrides(args))
    dataset = _load_eval_dataset(run)
    if run.task == "chain-f1":
        predictions = data_io.read_chain_predictions(_require_file(run.predictions, "predictions"))
        classes = data_io.chain_class_alphabet(dataset).names
        report = data_io.evaluate_chain(predictions, [ex.tags for ex in dataset], classes)
    else:
        predictions = data_io.read_alignment_links(_require_file(run.predictions, "predictions"), dataset)
        report = data_io.evaluate_alignment(predictions, dataset)
    if run.report_out:
        with open(run.report_out, "w", encoding="utf-8") as handle:
            handle.write(report.text)
    print(report.text, end="")
    return 0


def cmd_selftest(args: argparse.Namespace) -> int:
    results = run_suites(budget=args.budget, seed=args.seed if args.seed is not None else 0)
    failed = 0
    for result in results:
        print(f"{result.status:4s} {result.name}: {result.detail}")
        if result.status == "FAIL":
            failed += 1
    skipped = sum(1 for r in results if r.status == "SKIP")
    passed = sum(1 for r in results if r.status == "PASS")
    print(f"{passed} passed, {failed} failed, {skipped} skipped")
    return 1 if failed else 0


def cmd_bench(args: argparse.Namespace) -> int:
    lengths = [int(part) for part in args.lengths.split(",") if part]
    if not lengths or any(n < 1 for n in lengths):
        raise ConfigError(f"bad length list: {args.lengths!r}")
    rows = run_bench(lengths, seed=args.seed if args.seed is not None else 0)
    print(format_bench(rows), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advpred",
        description="Train and run adversarial structured predictors for F1 and AER.",
        epilog="Every config key can be overridden via ADVPRED_<KEY> environment variables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_config: bool = True):
        if with_config:
            p.add_argument("--config", required=True, help="key = value run configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--jobs", type=int, default=None, help="worker cap for per-example parallelism")
        p.add_argument("--br-mode", choices=("exact", "approx"), default=None,
                       help="best-response mode during training")
        p.add_argument("--lambda", dest="lam", type=float, default=None, help="L2 coefficient")
        p.add_argument("--target-class", default=None, help="target class for chain F1 games")

    p_train = sub.add_parser("train", help="train a model and write it with its objective trace")
    add_common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="write predictions for the eval data")
    add_common(p_predict)
    p_predict.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("eval", help="score a predictions file against gold data")
    add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_self = sub.add_parser("selftest", help="run the oracle-equivalence and golden suites")
    p_self.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="max enumeration size per suite; smaller budgets skip suites")
    p_self.add_argument("--seed", type=int, default=None)
    p_self.set_defaults(func=cmd_selftest)

    p_bench = sub.add_parser("bench", help="time exact vs approximate double-oracle runs")
    p_bench.add_argument("--lengths", default="10,20,40", help="comma-separated sequence lengths")
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataFormatError, InvalidInputError, BudgetExceededError, FileNotFoundError) as exc:
        print(f"advpred: {exc}", file=sys.stderr)
        return 2
    except SolverFailureError as exc:
        print(f"advpred: solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
