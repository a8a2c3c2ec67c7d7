from .baselines import BASELINE_NAMES, BaselineSpec, run_baseline
from .folds import FoldPlan, stratified_kfold
from .harness import (
    ablate,
    ablation_table,
    config_for,
    run_fusion_cv,
    smote_bundles,
)
from .metrics import (
    FoldMetrics,
    MetricsReport,
    auc_rank,
    compute_metrics,
    report_table,
    roc_points,
)
from .smote import SmoteResult, smote

__all__ = [
    "BASELINE_NAMES",
    "BaselineSpec",
    "run_baseline",
    "FoldPlan",
    "stratified_kfold",
    "ablate",
    "ablation_table",
    "config_for",
    "run_fusion_cv",
    "smote_bundles",
    "FoldMetrics",
    "MetricsReport",
    "auc_rank",
    "compute_metrics",
    "report_table",
    "roc_points",
    "SmoteResult",
    "smote",
]
