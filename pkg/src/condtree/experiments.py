"""Model selection, bias-detection and bias-mitigation experiments, reports.

The bias experiment quantifies how much the conditioning operator matters on
a dataset: it measures threshold collisions on a full-data fit (rho) and per
cross-validation training fold (rho_k), scores every test fold once under LE
and once under LT, and runs a two-sided signed-rank test on the paired
scores. The mitigation experiment evaluates an operator-free prediction
strategy against both single-operator baselines on the same folds and
classifies dominance from one-sided tests at the 0.05 level.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from .data import CLASSIFICATION, Dataset
from .ensemble import Strategy, fit_forest, predict_forest
from .errors import DataError
from .lattice import threshold_collision_ratio
from .stats import ALPHA, FoldPlan, PairedScores, make_folds, r2, roc_auc, wilcoxon
from .tree import Hyperparams, Operator, Tree, fit, predict

TREE = "tree"
FOREST = "forest"
_MODELS = (TREE, FOREST)

#: Mitigation strategies applicable per model kind (single trees have no
#: half to reassign, so only dual averaging applies).
MITIGATION_STRATEGIES = {
    TREE: (Strategy.DUAL_AVERAGE,),
    FOREST: (Strategy.DUAL_AVERAGE, Strategy.HALF_HALF, Strategy.NEGATED_HALF),
}

DOMINATES = "dominates"
MINORIZED = "minorized"
INDISTINGUISHABLE = "indistinguishable"

# alpha grid steps as exact fractions (numerator, denominator) of the record
# count: 0.5%, 1%, 2%, 5%, 10%, 15%, 20%, each rounded up.
_ALPHA_FRACTIONS = ((5, 1000), (1, 100), (2, 100), (5, 100), (10, 100), (15, 100), (20, 100))
_BETA_RANGE = range(2, 16)


@dataclass
class ExperimentConfig:
    """Everything an experiment run needs besides the data itself."""

    model: str
    hyperparams: Hyperparams
    k: int = 5
    repeats: int = 20
    seed: int = 0
    n_estimators: int = 100
    n_threads: int = 1
    dataset_path: str | None = None
    schema_path: str | None = None
    task: str | None = None
    strategies: tuple = ()
    out_prefix: str | None = None

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.n_threads < 1:
            raise ValueError("n_threads must be >= 1")


@dataclass
class BiasReport:
    rho: float
    rho_k: float
    score_diff: float  # mean(LE score) - mean(LT score)
    p_neq_significant: bool
    p_value: float
    metric: str
    scores_le: np.ndarray
    scores_lt: np.ndarray
    n_folds_evaluated: int
    n_folds_skipped: int


@dataclass
class MitigationReport:
    strategy: Strategy
    p_neq_significant: bool  # two-sided LE-vs-LT flag, as in the bias run
    vs_le: str
    vs_lt: str
    improvement_over_worst: float  # mean(strategy) - min(mean LE, mean LT)
    p_value_neq: float
    p_values: dict
    metric: str
    scores_le: np.ndarray
    scores_lt: np.ndarray
    scores_strategy: np.ndarray
    n_folds_evaluated: int
    n_folds_skipped: int


def default_grid(n_rows: int, base: Hyperparams) -> list[Hyperparams]:
    """Leaf-size axis (depth unbounded) plus depth axis (leaf size 1).

    The leaf-size steps are 0.5%..20% of the record count rounded up
    (integer arithmetic, so no float rounding artifacts), deduplicated;
    depths run 2..15.
    """
    grid = []
    seen = set()
    for num, den in _ALPHA_FRACTIONS:
        alpha = -(-n_rows * num // den)
        if alpha not in seen:
            seen.add(alpha)
            grid.append(replace(base, min_samples_leaf=alpha, max_depth=None))
    for beta in _BETA_RANGE:
        grid.append(replace(base, min_samples_leaf=1, max_depth=beta))
    return grid


def _require_scorable_task(data: Dataset) -> str:
    """Return the metric name; reject tasks the scorers cannot handle."""
    if data.task == CLASSIFICATION:
        if data.n_classes != 2:
            raise DataError(
                f"AUC scoring requires binary classification, got {data.n_classes} classes"
            )
        return "auc"
    return "r2"


def _fold_is_scoreable(data: Dataset, test_rows: np.ndarray) -> bool:
    y = data.targets[test_rows]
    if data.task == CLASSIFICATION:
        return np.unique(y).size == 2
    return y.size >= 2 and y.min() < y.max()


def _model_values(model, X: np.ndarray, mode) -> np.ndarray:
    """Per-row positive-class probability (classification) or prediction.

    mode: an Operator or "dual" for a single tree; a Strategy for a forest.
    """
    values = np.empty(len(X), dtype=np.float64)
    classification = model.task == CLASSIFICATION
    for i, x in enumerate(X):
        if isinstance(model, Tree):
            if mode == "dual":
                le = predict(model, x, Operator.LE)
                lt = predict(model, x, Operator.LT)
                p = (le + lt) / 2.0
            else:
                p = predict(model, x, mode)
        else:
            p = predict_forest(model, x, mode)
        values[i] = p[1] if classification else p
    return values


def _score(data: Dataset, test_rows: np.ndarray, values: np.ndarray) -> float:
    y = data.targets[test_rows]
    if data.task == CLASSIFICATION:
        return roc_auc(values, (y == 1).astype(np.int64))
    return r2(values, y)


def _fit_model(train: Dataset, config: ExperimentConfig, strategy: Strategy = Strategy.DEFAULT_LE):
    if config.model == TREE:
        return fit(train, config.hyperparams)
    return fit_forest(
        train,
        config.n_estimators,
        config.hyperparams,
        strategy=strategy,
        n_threads=config.n_threads,
    )


def _iter_folds(data: Dataset, config: ExperimentConfig):
    """(test_rows, train_rows) in deterministic (repeat, fold) order."""
    labels = data.targets if data.task == CLASSIFICATION else None
    plan = FoldPlan(
        k=config.k,
        repeats=config.repeats,
        seed=config.seed,
        stratified=data.task == CLASSIFICATION,
    )
    all_rows = np.arange(data.n_rows)
    for repeat_folds in make_folds(data.n_rows, labels, plan):
        for test_rows in repeat_folds:
            yield test_rows, np.setdiff1d(all_rows, test_rows)


def model_select(
    data: Dataset,
    grid: list[Hyperparams],
    k: int = 5,
    repeats: int = 20,
    seed: int = 0,
    model: str = TREE,
    n_estimators: int = 100,
    n_threads: int = 1,
) -> tuple[Hyperparams, float]:
    """Grid point with the best mean CV score under the LE operator.

    Ties favor stronger regularization: larger minimum leaf size, then
    smaller maximum depth (unbounded counting as largest), then the point
    listed first.
    """
    if not grid:
        raise ValueError("hyperparameter grid must be non-empty")
    _require_scorable_task(data)
    probe = ExperimentConfig(
        model=model, hyperparams=grid[0], k=k, repeats=repeats, seed=seed,
        n_estimators=n_estimators, n_threads=n_threads,
    )
    folds = [
        (test_rows, train_rows)
        for test_rows, train_rows in _iter_folds(data, probe)
        if _fold_is_scoreable(data, test_rows)
    ]
    if not folds:
        raise DataError(
            "model selection failed: every fold was degenerate "
            "(single-class or constant-target test folds)"
        )
    le_mode = Operator.LE if model == TREE else Strategy.DEFAULT_LE

    best = None  # (score, alpha, beta_rank, hp)
    for hp in grid:
        config = replace(probe, hyperparams=hp)
        scores = []
        for test_rows, train_rows in folds:
            m = _fit_model(data.subset(train_rows), config)
            values = _model_values(m, data.features[test_rows], le_mode)
            scores.append(_score(data, test_rows, values))
        mean_score = float(np.mean(scores))
        alpha = hp.min_samples_leaf
        beta_rank = float("inf") if hp.max_depth is None else hp.max_depth
        if (
            best is None
            or mean_score > best[0]
            or (mean_score == best[0] and (alpha, -beta_rank) > (best[1], -best[2]))
        ):
            best = (mean_score, alpha, beta_rank, hp)
    return best[3], best[0]


def run_bias_experiment(data: Dataset, config: ExperimentConfig) -> BiasReport:
    """Measure the inference-time effect of the conditioning operator.

    Fits once on the full data for the collision ratio rho, then on every
    cross-validation training fold; each test fold is scored under LE and
    under LT with the same fitted model. Folds whose test part cannot be
    scored (single class / constant target) are skipped and counted.
    """
    metric = _require_scorable_task(data)
    full_model = _fit_model(data, config)
    rho = threshold_collision_ratio(full_model, data).rho

    le_mode = Operator.LE if config.model == TREE else Strategy.DEFAULT_LE
    lt_mode = Operator.LT if config.model == TREE else Strategy.NONDEFAULT_LT
    scores_le, scores_lt, rho_ks = [], [], []
    skipped = 0
    for test_rows, train_rows in _iter_folds(data, config):
        if not _fold_is_scoreable(data, test_rows):
            skipped += 1
            continue
        train = data.subset(train_rows)
        m = _fit_model(train, config)
        rho_ks.append(threshold_collision_ratio(m, train).rho)
        X = data.features[test_rows]
        scores_le.append(_score(data, test_rows, _model_values(m, X, le_mode)))
        scores_lt.append(_score(data, test_rows, _model_values(m, X, lt_mode)))
    if not scores_le:
        raise DataError("bias experiment failed: every fold was degenerate")

    a = np.asarray(scores_le)
    b = np.asarray(scores_lt)
    test = wilcoxon(PairedScores(a, b), alternative="two-sided")
    return BiasReport(
        rho=rho,
        rho_k=float(np.mean(rho_ks)),
        score_diff=float(np.mean(a)) - float(np.mean(b)),
        p_neq_significant=test.p_value < ALPHA,
        p_value=test.p_value,
        metric=metric,
        scores_le=a,
        scores_lt=b,
        n_folds_evaluated=len(scores_le),
        n_folds_skipped=skipped,
    )


def _dominance(ours: np.ndarray, theirs: np.ndarray) -> tuple[str, float, float]:
    p_greater = wilcoxon(PairedScores(ours, theirs), alternative="greater").p_value
    p_less = wilcoxon(PairedScores(theirs, ours), alternative="greater").p_value
    if p_greater < ALPHA:
        verdict = DOMINATES
    elif p_less < ALPHA:
        verdict = MINORIZED
    else:
        verdict = INDISTINGUISHABLE
    return verdict, p_greater, p_less


def run_mitigation_experiment(
    data: Dataset, config: ExperimentConfig, strategy: Strategy
) -> MitigationReport:
    """Evaluate an operator-free strategy against both operators per fold.

    The same fitted model provides the LE, LT, and strategy predictions
    (NegatedHalf needs a second forest trained with inverted second-half
    features under the same seed, whose plain half matches the baseline).
    """
    metric = _require_scorable_task(data)
    if strategy not in MITIGATION_STRATEGIES[config.model]:
        allowed = ", ".join(s.value for s in MITIGATION_STRATEGIES[config.model])
        raise ValueError(
            f"strategy {strategy.value} not applicable to a {config.model} (use one of: {allowed})"
        )
    le_mode = Operator.LE if config.model == TREE else Strategy.DEFAULT_LE
    lt_mode = Operator.LT if config.model == TREE else Strategy.NONDEFAULT_LT
    strat_mode = "dual" if config.model == TREE else strategy

    scores_le, scores_lt, scores_strat = [], [], []
    skipped = 0
    for test_rows, train_rows in _iter_folds(data, config):
        if not _fold_is_scoreable(data, test_rows):
            skipped += 1
            continue
        train = data.subset(train_rows)
        m = _fit_model(train, config)
        X = data.features[test_rows]
        scores_le.append(_score(data, test_rows, _model_values(m, X, le_mode)))
        scores_lt.append(_score(data, test_rows, _model_values(m, X, lt_mode)))
        if strategy is Strategy.NEGATED_HALF:
            m_strat = _fit_model(train, config, strategy=Strategy.NEGATED_HALF)
        else:
            m_strat = m
        scores_strat.append(_score(data, test_rows, _model_values(m_strat, X, strat_mode)))
    if not scores_le:
        raise DataError("mitigation experiment failed: every fold was degenerate")

    a = np.asarray(scores_le)
    b = np.asarray(scores_lt)
    s = np.asarray(scores_strat)
    neq = wilcoxon(PairedScores(a, b), alternative="two-sided")
    vs_le, p_s_gt_le, p_le_gt_s = _dominance(s, a)
    vs_lt, p_s_gt_lt, p_lt_gt_s = _dominance(s, b)
    worst = min(float(np.mean(a)), float(np.mean(b)))
    return MitigationReport(
        strategy=strategy,
        p_neq_significant=neq.p_value < ALPHA,
        vs_le=vs_le,
        vs_lt=vs_lt,
        improvement_over_worst=float(np.mean(s)) - worst,
        p_value_neq=neq.p_value,
        p_values={
            "strategy_gt_le": p_s_gt_le,
            "le_gt_strategy": p_le_gt_s,
            "strategy_gt_lt": p_s_gt_lt,
            "lt_gt_strategy": p_lt_gt_s,
        },
        metric=metric,
        scores_le=a,
        scores_lt=b,
        scores_strategy=s,
        n_folds_evaluated=len(scores_le),
        n_folds_skipped=skipped,
    )


def make_planted_lattice(
    n: int = 600, n_bins: int = 15, p_middle: float = 0.08, seed: int = 7
) -> Dataset:
    """Synthetic binary-classification data with a planted lattice feature.

    Feature 0 takes values {0, 1, 2}; the base rule labels a record by
    (feature0 >= 1) XOR (context bin parity), and records with feature0 == 1
    carry the flipped label. The middle value is rare, so deep trees fitted
    on resampled subsets often see only {0, 2} inside a context bin and place
    the boundary exactly at 1.0 — an observed domain value — making held-out
    middle-value records operator-sensitive.
    """
    if n < 4 * n_bins:
        raise ValueError("need at least a few records per context bin")
    rng = np.random.default_rng(seed)
    p_side = (1.0 - p_middle) / 2.0
    f0 = rng.choice(np.array([0.0, 1.0, 2.0]), size=n, p=[p_side, p_middle, p_side])
    f1 = rng.random(n)
    parity = np.floor(f1 * n_bins).astype(np.int64) % 2
    base = (f0 >= 1.0).astype(np.int64) ^ parity
    y = base ^ (f0 == 1.0).astype(np.int64)
    features = np.column_stack([f0, f1])
    if np.unique(y).size != 2:
        raise ValueError("degenerate draw: only one class generated; change the seed")
    return Dataset(
        features=features,
        targets=y,
        task=CLASSIFICATION,
        feature_names=["lattice", "context"],
        n_classes=2,
        class_labels=["0", "1"],
    )


# ---------------------------------------------------------------------------
# Report rendering (CSV rows mirror the experiment tables; JSON carries the
# raw scores and p-values as well).

BIAS_CSV_FIELDS = ("dataset", "model", "metric", "rho", "rho_k", "score_diff", "significant")
MITIGATION_CSV_FIELDS = (
    "dataset",
    "model",
    "strategy",
    "metric",
    "bias_significant",
    "vs_le",
    "vs_lt",
    "improvement_over_worst",
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def bias_csv_row(dataset_name: str, config: ExperimentConfig, report: BiasReport) -> dict:
    return {
        "dataset": dataset_name,
        "model": config.model,
        "metric": report.metric,
        "rho": report.rho,
        "rho_k": report.rho_k,
        "score_diff": report.score_diff,
        "significant": report.p_neq_significant,
    }


def mitigation_csv_row(
    dataset_name: str, config: ExperimentConfig, report: MitigationReport
) -> dict:
    return {
        "dataset": dataset_name,
        "model": config.model,
        "strategy": report.strategy.value,
        "metric": report.metric,
        "bias_significant": report.p_neq_significant,
        "vs_le": report.vs_le,
        "vs_lt": report.vs_lt,
        "improvement_over_worst": report.improvement_over_worst,
    }


def write_report_csv(path: str, fieldnames: tuple, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj]
    if isinstance(obj, (np.floating, np.bool_, np.integer)):
        return obj.item()
    if isinstance(obj, Strategy):
        return obj.value
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return obj


def report_payload(dataset_name: str, kind: str, config: ExperimentConfig, report) -> dict:
    cfg = {
        "model": config.model,
        "hyperparams": asdict(config.hyperparams),
        "k": config.k,
        "repeats": config.repeats,
        "seed": config.seed,
    }
    if config.model == FOREST:
        cfg["n_estimators"] = config.n_estimators
    body = {key: _jsonable(value) for key, value in asdict(report).items()}
    return {"experiment": kind, "dataset": dataset_name, "config": cfg, "report": body}


def write_report_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")
