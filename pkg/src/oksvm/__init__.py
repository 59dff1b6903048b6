"""Soft-margin kernel SVM with learned RBF width, plus benchmark tooling.

Two training entry points: ``train_svm_baseline`` solves the dual once at
a fixed (C, gamma); ``train_oksvm`` additionally learns gamma by gradient
descent on the maximized dual with a bold-driver learning rate. The
harness submodule reproduces the synthetic-grid and cross-validation
comparisons between the two.
"""

from .dataset import (
    Dataset,
    FoldAssignment,
    SyntheticConfig,
    generate_synthetic,
    load_csv,
    save_csv,
    split_train_test,
    standardize,
    stratified_kfold,
)
from .errors import DataError, NonConvergenceError
from .harness import (
    DATASET_PRESETS,
    GridSpec,
    ResultRow,
    emit_heatmap_csv,
    evaluate_model,
    load_preset,
    load_result_rows,
    run_fixed_grid,
    run_real_cv,
    run_tuned_grid,
    summarize_cv,
    write_result_rows,
)
from .kernel import (
    DistanceMatrix,
    KernelCache,
    cross_squared_distances,
    rbf_kernel_matrix,
    rbf_kernel_row,
    squared_distance_matrix,
)
from .metrics import (
    ComparisonRecord,
    MetricsRecord,
    auc,
    basic_metrics,
    confusion,
    f1_diff,
    wins_losses_ratio,
)
from .optimizer import (
    OksvmConfig,
    OptimizerState,
    TraceRecord,
    dual_gamma_gradient,
    export_trace_csv,
    gamma_step,
    train_oksvm,
    train_svm_baseline,
)
from .seeding import derive_seed
from .solver import (
    SolverConfig,
    SvmModel,
    compute_bias,
    decision_values,
    dual_objective,
    load_model,
    predict,
    save_model,
    solve_dual,
    solve_dual_bruteforce,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "FoldAssignment", "SyntheticConfig",
    "generate_synthetic", "load_csv", "save_csv",
    "split_train_test", "standardize", "stratified_kfold",
    "DataError", "NonConvergenceError",
    "DistanceMatrix", "KernelCache",
    "cross_squared_distances", "rbf_kernel_matrix", "rbf_kernel_row",
    "squared_distance_matrix",
    "SolverConfig", "SvmModel",
    "compute_bias", "decision_values", "dual_objective",
    "load_model", "predict", "save_model",
    "solve_dual", "solve_dual_bruteforce",
    "OksvmConfig", "OptimizerState", "TraceRecord",
    "dual_gamma_gradient", "export_trace_csv", "gamma_step",
    "train_oksvm", "train_svm_baseline",
    "ComparisonRecord", "MetricsRecord",
    "auc", "basic_metrics", "confusion", "f1_diff", "wins_losses_ratio",
    "DATASET_PRESETS", "GridSpec", "ResultRow",
    "emit_heatmap_csv", "evaluate_model", "load_preset", "load_result_rows",
    "run_fixed_grid", "run_real_cv", "run_tuned_grid",
    "summarize_cv", "write_result_rows",
    "derive_seed",
    "__version__",
]
