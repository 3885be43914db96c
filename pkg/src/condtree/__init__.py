"""Decision trees and random forests with an explicit conditioning operator.

Training is operator-agnostic; the comparison used at internal nodes
(``x <= t`` vs ``x < t``) is chosen at inference time. The package provides
tree mirroring (which converts one operator into the other exactly),
collision auditing for lattice-valued features, bias-elimination prediction
strategies for forests, and an experiment harness that measures and
mitigates the resulting conditioning bias.
"""

from .backend import active_backend, set_backend
from .data import (
    CLASSIFICATION,
    MISSING,
    REGRESSION,
    Dataset,
    RawColumn,
    assemble,
    encode_categories,
    impute_most_frequent,
    load_csv,
    load_dataset,
    preprocess,
)
from .datasets import FIXTURES, load_fixture
from .ensemble import (
    Forest,
    Strategy,
    fit_forest,
    predict_forest,
    predict_integrated,
    traversal_cost,
)
from .errors import CondtreeError, DataError, ModelFormatError
from .experiments import (
    BiasReport,
    ExperimentConfig,
    MitigationReport,
    default_grid,
    make_planted_lattice,
    model_select,
    run_bias_experiment,
    run_mitigation_experiment,
)
from .lattice import (
    CollisionReport,
    LatticeReport,
    is_lattice_feature,
    lattice_report,
    threshold_collision_ratio,
)
from .mirror import fit_on_negated, mirror, negate_features, predict_nondefault
from .serialize import deserialize_model, serialize_model
from .stats import (
    FoldPlan,
    PairedScores,
    TestResult,
    make_folds,
    r2,
    roc_auc,
    wilcoxon,
)
from .tree import (
    Hyperparams,
    Internal,
    Leaf,
    Operator,
    Tree,
    best_split,
    collect_thresholds,
    entropy,
    fit,
    gini,
    predict,
    trees_equal,
    variance,
)

__version__ = "0.1.0"

__all__ = [
    "CLASSIFICATION",
    "REGRESSION",
    "MISSING",
    "Dataset",
    "RawColumn",
    "load_csv",
    "load_dataset",
    "preprocess",
    "impute_most_frequent",
    "encode_categories",
    "assemble",
    "FIXTURES",
    "load_fixture",
    "Hyperparams",
    "Operator",
    "Tree",
    "Leaf",
    "Internal",
    "fit",
    "predict",
    "best_split",
    "collect_thresholds",
    "trees_equal",
    "gini",
    "entropy",
    "variance",
    "mirror",
    "negate_features",
    "fit_on_negated",
    "predict_nondefault",
    "Forest",
    "Strategy",
    "fit_forest",
    "predict_forest",
    "predict_integrated",
    "traversal_cost",
    "LatticeReport",
    "CollisionReport",
    "is_lattice_feature",
    "lattice_report",
    "threshold_collision_ratio",
    "PairedScores",
    "TestResult",
    "FoldPlan",
    "roc_auc",
    "r2",
    "wilcoxon",
    "make_folds",
    "ExperimentConfig",
    "BiasReport",
    "MitigationReport",
    "default_grid",
    "model_select",
    "run_bias_experiment",
    "run_mitigation_experiment",
    "make_planted_lattice",
    "serialize_model",
    "deserialize_model",
    "CondtreeError",
    "DataError",
    "ModelFormatError",
    "set_backend",
    "active_backend",
    "__version__",
]
