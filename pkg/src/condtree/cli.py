"""Command-line interface.

Subcommands: audit (lattice report), select (hyperparameter search), fit
(train and write a model), predict (apply a stored model), experiment bias /
experiment mitigate. Exit codes: 0 success, 1 usage error, 2 data error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .data import CLASSIFICATION, REGRESSION, Dataset, load_dataset
from .datasets import FIXTURES, fixture_paths, load_schema
from .ensemble import Strategy, fit_forest, predict_forest
from .errors import DataError
from .experiments import (
    BIAS_CSV_FIELDS,
    FOREST,
    MITIGATION_CSV_FIELDS,
    TREE,
    ExperimentConfig,
    bias_csv_row,
    default_grid,
    mitigation_csv_row,
    model_select,
    report_payload,
    run_bias_experiment,
    run_mitigation_experiment,
    write_report_csv,
    write_report_json,
)
from .lattice import lattice_report
from .serialize import deserialize_model, serialize_model
from .tree import Hyperparams, Operator, Tree, fit, predict

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

_STRATEGY_CHOICES = [s.value for s in Strategy]
_MITIGATE_CHOICES = [
    Strategy.DUAL_AVERAGE.value,
    Strategy.HALF_HALF.value,
    Strategy.NEGATED_HALF.value,
]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed")
    common.add_argument(
        "--task",
        choices=[CLASSIFICATION, REGRESSION],
        default=None,
        help="override the schema's task",
    )
    common.add_argument("--folds", type=int, default=5, help="folds per CV repeat")
    common.add_argument("--repeats", type=int, default=20, help="CV repeats")
    common.add_argument("--threads", type=int, default=1, help="training threads")
    common.add_argument("--out", default=None, help="output file (or prefix for experiments)")

    dataopts = argparse.ArgumentParser(add_help=False)
    dataopts.add_argument("data", help="dataset CSV path or bundled fixture name")
    dataopts.add_argument(
        "--schema",
        default=None,
        help="schema JSON path (default: <data>.schema.json next to the file)",
    )

    modelopts = argparse.ArgumentParser(add_help=False)
    modelopts.add_argument("--model", choices=[TREE, FOREST], default=TREE)
    modelopts.add_argument(
        "--alpha", type=int, default=1, help="minimum number of samples on a leaf"
    )
    modelopts.add_argument("--beta", type=int, default=None, help="maximum depth")
    modelopts.add_argument(
        "--impurity",
        choices=["gini", "entropy", "variance"],
        default=None,
        help="default: gini for classification, variance for regression",
    )
    modelopts.add_argument(
        "--unweighted-impurity",
        action="store_true",
        help="rank splits by I(left)+I(right) instead of the size-weighted sum",
    )
    modelopts.add_argument(
        "--estimators", type=int, default=100, help="trees per forest"
    )

    parser = argparse.ArgumentParser(
        prog="condtree",
        description="Decision trees and forests with an explicit conditioning "
        "operator, plus conditioning-bias experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser(
        "audit",
        parents=[common, dataopts],
        help="report lattice-valued features of a dataset",
    )
    sub.add_parser(
        "select",
        parents=[common, dataopts, modelopts],
        help="grid-search leaf size and depth by repeated CV under LE",
    )
    p_fit = sub.add_parser(
        "fit", parents=[common, dataopts, modelopts], help="train a model and write it as JSON"
    )
    p_fit.add_argument(
        "--strategy",
        choices=_STRATEGY_CHOICES,
        default=Strategy.DEFAULT_LE.value,
        help="forest training/prediction strategy",
    )
    p_predict = sub.add_parser(
        "predict", parents=[common], help="apply a stored model to a dataset"
    )
    p_predict.add_argument("model", help="model JSON path")
    p_predict.add_argument("data", help="dataset CSV path or bundled fixture name")
    p_predict.add_argument("--schema", default=None)
    p_predict.add_argument(
        "--operator",
        choices=["le", "lt", "avg"],
        default=None,
        help="conditioning at inference (default: the model's own strategy; "
        "omit for negated-half forests)",
    )

    p_exp = sub.add_parser("experiment", help="bias detection / mitigation experiments")
    exp_sub = p_exp.add_subparsers(dest="experiment_kind", required=True)
    exp_sub.add_parser(
        "bias",
        parents=[common, dataopts, modelopts],
        help="LE-vs-LT score differences and threshold collisions over CV",
    )
    p_mit = exp_sub.add_parser(
        "mitigate",
        parents=[common, dataopts, modelopts],
        help="evaluate an operator-free strategy against both operators",
    )
    p_mit.add_argument("--strategy", choices=_MITIGATE_CHOICES, required=True)
    return parser


def _load_data(args) -> tuple[Dataset, str]:
    """Resolve the data argument to a Dataset plus a display name."""
    name = args.data
    if os.path.exists(name):
        csv_path = Path(name)
        schema_path = args.schema or csv_path.with_suffix("").with_suffix(".schema.json")
        display = csv_path.stem
    elif name in FIXTURES:
        csv_path, schema_path = fixture_paths(name)
        if args.schema:
            schema_path = args.schema
        if not csv_path.is_file():
            raise DataError(
                f"fixture file missing: {csv_path} — see the data/README.md "
                f"shipped with the package for how to obtain it"
            )
        display = name
    else:
        raise DataError(f"no such dataset file or fixture: '{name}'")
    schema = load_schema(schema_path)
    if args.task:
        schema = {**schema, "task": args.task}
    return load_dataset(str(csv_path), schema), display


def _hyperparams(args, data: Dataset) -> Hyperparams:
    impurity = args.impurity
    if impurity is None:
        impurity = "variance" if data.task == REGRESSION else "gini"
    return Hyperparams(
        min_samples_leaf=args.alpha,
        max_depth=args.beta,
        impurity=impurity,
        seed=args.seed,
        weighted_impurity=not args.unweighted_impurity,
    )


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_audit(args) -> int:
    data, display = _load_data(args)
    rep = lattice_report(data)
    payload = {
        "dataset": display,
        "task": data.task,
        "n_rows": data.n_rows,
        "n_features": data.n_features,
        "features": [
            {"name": data.feature_names[f], "is_lattice": rep.is_lattice[f]}
            for f in range(data.n_features)
        ],
        "n_lattice": rep.n_lattice,
        "proportion": rep.proportion,
    }
    _emit(payload, args.out)
    return EXIT_OK


def _cmd_select(args) -> int:
    data, display = _load_data(args)
    base = _hyperparams(args, data)
    grid = default_grid(data.n_rows, base)
    best, score = model_select(
        data,
        grid,
        k=args.folds,
        repeats=args.repeats,
        seed=args.seed,
        model=args.model,
        n_estimators=args.estimators,
        n_threads=args.threads,
    )
    payload = {
        "dataset": display,
        "model": args.model,
        "metric": "auc" if data.task == CLASSIFICATION else "r2",
        "best_hyperparams": asdict(best),
        "mean_score": score,
    }
    _emit(payload, args.out)
    return EXIT_OK


def _cmd_fit(args) -> int:
    data, _ = _load_data(args)
    hp = _hyperparams(args, data)
    if args.model == TREE:
        model = fit(data, hp)
    else:
        model = fit_forest(
            data,
            args.estimators,
            hp,
            strategy=Strategy(args.strategy),
            n_threads=args.threads,
        )
    text = serialize_model(model)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _predict_rows(model, X: np.ndarray, operator: str | None):
    if isinstance(model, Tree):
        for x in X:
            if operator == "avg":
                le = predict(model, x, Operator.LE)
                lt = predict(model, x, Operator.LT)
                yield (le + lt) / 2.0
            else:
                op = Operator.LT if operator == "lt" else Operator.LE
                yield predict(model, x, op)
    else:
        strategy = {
            None: None,
            "le": Strategy.DEFAULT_LE,
            "lt": Strategy.NONDEFAULT_LT,
            "avg": Strategy.DUAL_AVERAGE,
        }[operator]
        for x in X:
            yield predict_forest(model, x, strategy)


def _cmd_predict(args) -> int:
    try:
        with open(args.model, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read model file: {exc}") from None
    model = deserialize_model(text)
    data, _ = _load_data(args)
    if data.n_features != model.n_features:
        raise DataError(
            f"dataset has {data.n_features} features, model expects {model.n_features}"
        )
    if data.task != model.task:
        raise DataError(f"dataset task '{data.task}' != model task '{model.task}'")
    predictions = []
    for p in _predict_rows(model, data.features, args.operator):
        predictions.append([float(v) for v in p] if model.task == CLASSIFICATION else float(p))
    _emit({"predictions": predictions}, args.out)
    return EXIT_OK


def _experiment_config(args, data: Dataset) -> ExperimentConfig:
    return ExperimentConfig(
        model=args.model,
        hyperparams=_hyperparams(args, data),
        k=args.folds,
        repeats=args.repeats,
        seed=args.seed,
        n_estimators=args.estimators,
        n_threads=args.threads,
    )


def _emit_experiment(kind, display, config, report, row, fields, out) -> None:
    payload = report_payload(display, kind, config, report)
    if out:
        write_report_csv(out + ".csv", fields, [row])
        write_report_json(out + ".json", payload)
    else:
        print(json.dumps(payload, sort_keys=True, indent=2, allow_nan=False))


def _cmd_experiment(args) -> int:
    data, display = _load_data(args)
    config = _experiment_config(args, data)
    if args.experiment_kind == "bias":
        report = run_bias_experiment(data, config)
        row = bias_csv_row(display, config, report)
        _emit_experiment("bias", display, config, report, row, BIAS_CSV_FIELDS, args.out)
    else:
        strategy = Strategy(args.strategy)
        report = run_mitigation_experiment(data, config, strategy)
        row = mitigation_csv_row(display, config, report)
        _emit_experiment(
            "mitigate", display, config, report, row, MITIGATION_CSV_FIELDS, args.out
        )
    return EXIT_OK


_COMMANDS = {
    "audit": _cmd_audit,
    "select": _cmd_select,
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; fold the latter
        # into the documented usage exit code.
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 — last-resort mapping to exit 3
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
