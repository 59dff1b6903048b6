"""Experiment runners: synthetic grids, real-data CV, and heatmap export.

Seed discipline: every random choice in a run is derived from the run's
base seed through ``seeding.derive_seed``, keyed by the cell coordinates
(protocol tag, dim, sep, C, gamma index, repetition) plus a short role
tag ("data", "split", "solver", ...). Cells are therefore independent,
reproducible in isolation, and both methods inside one cell see the
identical dataset and split. Rows are emitted in nested loop order, so a
rerun with the same flags is byte-identical; wall_time stays empty unless
timing is requested, because timings never reproduce.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import (
    Dataset,
    FoldAssignment,
    SyntheticConfig,
    generate_synthetic,
    load_csv,
    split_train_test,
    standardize,
    stratified_kfold,
)
from .errors import DataError
from .kernel import rbf_kernel_matrix, squared_distance_matrix
from .metrics import MetricsRecord, auc, basic_metrics, confusion, f1_diff, wins_losses_ratio
from .optimizer import OksvmConfig, train_oksvm, train_svm_baseline
from .seeding import derive_seed
from .solver import SolverConfig, SvmModel, decision_values, solve_dual

METHODS = ("oksvm", "svm")

# Hyperparameter grids used by the harness defaults.
SYNTH_DIMS = (2, 3, 4, 5, 6, 7, 8)
SYNTH_SEPS = (0.6, 0.8, 1.0, 1.2, 1.4)
SYNTH_C_GRID = (0.5, 1.0, 1.5)
SYNTH_GAMMA_GRID = (0.1, 0.5, 0.9, 1.3, 1.7, 2.1)
REAL_C_GRID = (0.1, 0.4, 0.7, 1.0, 1.3, 1.6, 1.9)
REAL_GAMMA_GRID = (0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 1.5)

RESULT_COLUMNS = (
    "method", "dataset", "dim", "sep", "c", "gamma0", "seed", "fold",
    "acc", "precision", "recall", "f1", "auc", "tp", "fp", "tn", "fn",
    "final_gamma", "converged", "standardized", "wall_time",
)

_SUMMARY_METRICS = ("acc", "precision", "recall", "f1", "auc")


@dataclass(frozen=True)
class GridSpec:
    """Axes and bookkeeping of one synthetic experiment grid."""

    dims: tuple[int, ...]
    seps: tuple[float, ...]
    cs: tuple[float, ...]
    gammas: tuple[float, ...]
    repetitions: int = 20
    base_seed: int = 0
    test_fraction: float = 0.5
    n_samples: int = 200
    standardize: bool = False
    validation_fraction: float = 0.25
    tuning_runs: int = 10

    def __post_init__(self) -> None:
        for name in ("dims", "seps", "cs", "gammas"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must be nonempty")
            object.__setattr__(self, name, values)
        if self.repetitions < 1 or self.tuning_runs < 1:
            raise ValueError("repetitions and tuning_runs must be >= 1")
        if not (0.0 < self.test_fraction < 1.0 and 0.0 < self.validation_fraction < 1.0):
            raise ValueError("fractions must be in (0, 1)")
        if self.n_samples < 2 or self.n_samples % 2:
            raise ValueError("n_samples must be even and >= 2")


@dataclass(frozen=True)
class ResultRow:
    """One method evaluated on one (cell, repetition) or one CV fold."""

    method: str
    dataset: str
    dim: int
    sep: float | None
    c: float
    gamma0: float
    seed: int
    fold: int | None
    metrics: MetricsRecord
    final_gamma: float
    converged: bool
    standardized: bool
    wall_time: float | None = None


@dataclass(frozen=True)
class DatasetPreset:
    """Ingestion recipe for one benchmark CSV (see scripts/fetch_datasets.py).

    positive_label is ignored when threshold is set; threshold binarizes
    a numeric label column at "value > threshold".
    """

    name: str
    filename: str
    positive_label: str
    keep_labels: tuple[str, ...] | None = None
    threshold: float | None = None
    drop_incomplete: bool = False


DATASET_PRESETS = {
    "banknote": DatasetPreset("banknote", "banknote.csv", "1"),
    "breast-cancer": DatasetPreset("breast-cancer", "breast-cancer.csv", "4", drop_incomplete=True),
    "cleveland": DatasetPreset("cleveland", "cleveland.csv", "", threshold=0.0, drop_incomplete=True),
    "haberman": DatasetPreset("haberman", "haberman.csv", "2"),
    "iris": DatasetPreset("iris", "iris.csv", "virginica", keep_labels=("versicolor", "virginica")),
    "wdbc": DatasetPreset("wdbc", "wdbc.csv", "M"),
    "winequality-red": DatasetPreset("winequality-red", "winequality-red.csv", "", threshold=5.0),
}


def load_preset(name: str, data_dir: str | Path) -> Dataset:
    """Load one benchmark dataset from its canonical CSV."""
    if name not in DATASET_PRESETS:
        raise DataError(f"unknown dataset {name!r}; known: {sorted(DATASET_PRESETS)}")
    preset = DATASET_PRESETS[name]
    return load_csv(
        Path(data_dir) / preset.filename,
        "label",
        preset.positive_label,
        keep_labels=preset.keep_labels,
        threshold=preset.threshold,
        drop_incomplete=preset.drop_incomplete,
    )


def evaluate_model(model: SvmModel, test: Dataset) -> MetricsRecord:
    """Score a model on a held-out set; AUC from the pre-sign scores."""
    scores = decision_values(model, test.features)
    predictions = np.where(scores >= 0.0, 1, -1).astype(np.int64)
    record = basic_metrics(*confusion(test.labels, predictions))
    try:
        return record.with_auc(auc(test.labels, scores))
    except ValueError:
        # single-class test slice; AUC undefined
        return record


def _maybe_standardize(train: Dataset, test: Dataset, on: bool) -> tuple[Dataset, Dataset]:
    if not on:
        return train, test
    train_std, (test_std,) = standardize(train, [test])
    return train_std, test_std


def _clock(timing: bool) -> float | None:
    return time.perf_counter() if timing else None


def _elapsed(start: float | None) -> float | None:
    return None if start is None else time.perf_counter() - start


def _fixed_cell(
    spec: GridSpec,
    dim: int,
    sep: float,
    c: float,
    gamma_idx: int,
    rep: int,
    oksvm_cfg: OksvmConfig,
    solver_cfg: SolverConfig,
    timing: bool,
) -> list[ResultRow]:
    gamma = spec.gammas[gamma_idx]
    cell_seed = derive_seed(spec.base_seed, "fixed", dim, sep, c, gamma_idx, rep)
    ds = generate_synthetic(
        SyntheticConfig(spec.n_samples, dim, sep, derive_seed(cell_seed, "data"))
    )
    train, test = split_train_test(ds, spec.test_fraction, True, derive_seed(cell_seed, "split"))
    train, test = _maybe_standardize(train, test, spec.standardize)
    rows = []

    start = _clock(timing)
    ok_model, ok_state = train_oksvm(
        train, c,
        replace(oksvm_cfg, gamma0=gamma),
        replace(solver_cfg, seed=derive_seed(cell_seed, "solver", "oksvm")),
    )
    ok_time = _elapsed(start)
    rows.append(ResultRow(
        "oksvm", "synthetic", dim, sep, c, gamma, cell_seed, None,
        evaluate_model(ok_model, test), ok_state.gamma_t,
        ok_model.converged and ok_state.terminated_by != "step_cap",
        spec.standardize, ok_time,
    ))

    start = _clock(timing)
    svm_model = train_svm_baseline(
        train, c, gamma, replace(solver_cfg, seed=derive_seed(cell_seed, "solver", "svm"))
    )
    svm_time = _elapsed(start)
    rows.append(ResultRow(
        "svm", "synthetic", dim, sep, c, gamma, cell_seed, None,
        evaluate_model(svm_model, test), gamma, svm_model.converged,
        spec.standardize, svm_time,
    ))
    return rows


def _star_fixed(task: tuple) -> list[ResultRow]:
    return _fixed_cell(*task)


def _run_tasks(star, tasks: list[tuple], jobs: int) -> list[ResultRow]:
    """Run cell tasks, merging results in task order regardless of jobs."""
    if jobs <= 1:
        batches = [star(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(star, tasks))
    return [row for batch in batches for row in batch]


def run_fixed_grid(
    spec: GridSpec,
    out: str | Path | None = None,
    *,
    oksvm_config: OksvmConfig | None = None,
    solver_config: SolverConfig | None = None,
    jobs: int = 1,
    timing: bool = False,
) -> list[ResultRow]:
    """Both methods at the same fixed (C, gamma) on every grid cell.

    Emits 2 * |dims| * |seps| * |cs| * |gammas| * R rows; gamma doubles as
    the starting point gamma0 for the gamma-learning method.
    """
    oksvm_cfg = oksvm_config or OksvmConfig()
    solver_cfg = solver_config or SolverConfig()
    tasks = [
        (spec, dim, sep, c, gamma_idx, rep, oksvm_cfg, solver_cfg, timing)
        for dim in spec.dims
        for sep in spec.seps
        for c in spec.cs
        for gamma_idx in range(len(spec.gammas))
        for rep in range(spec.repetitions)
    ]
    rows = _run_tasks(_star_fixed, tasks, jobs)
    if out is not None:
        write_result_rows(rows, out)
    return rows


def _argmax_lexicographic(scores: np.ndarray) -> tuple[int, ...]:
    """Index of the strictly largest entry, first (smallest) on ties."""
    best: tuple[int, ...] | None = None
    best_score = -np.inf
    for idx in np.ndindex(scores.shape):
        if scores[idx] > best_score:
            best_score = scores[idx]
            best = idx
    assert best is not None
    return best


def _svm_grid_f1(
    sub: Dataset,
    val: Dataset,
    cs: Sequence[float],
    gammas: Sequence[float],
    seed_base: int,
    solver_cfg: SolverConfig,
) -> np.ndarray:
    """Validation F1 for every (C, gamma); distances computed once."""
    scores = np.zeros((len(cs), len(gammas)))
    d2 = squared_distance_matrix(sub.features)
    for gi, gamma in enumerate(gammas):
        kern = rbf_kernel_matrix(d2, gamma)
        for ci, c in enumerate(cs):
            cfg = replace(solver_cfg, seed=derive_seed(seed_base, "svm", ci, gi))
            model = solve_dual(kern, sub.labels, c, cfg, features=sub.features)
            scores[ci, gi] = evaluate_model(model, val).f1
    return scores


def _oksvm_grid_f1(
    sub: Dataset,
    val: Dataset,
    cs: Sequence[float],
    seed_base: int,
    oksvm_cfg: OksvmConfig,
    solver_cfg: SolverConfig,
) -> np.ndarray:
    """Validation F1 per C; gamma is learned, so only C is tuned."""
    scores = np.zeros(len(cs))
    for ci, c in enumerate(cs):
        cfg = replace(solver_cfg, seed=derive_seed(seed_base, "oksvm", ci))
        model, _ = train_oksvm(sub, c, oksvm_cfg, cfg)
        scores[ci] = evaluate_model(model, val).f1
    return scores


def _tuned_cell(
    spec: GridSpec,
    dim: int,
    sep: float,
    rep: int,
    oksvm_cfg: OksvmConfig,
    solver_cfg: SolverConfig,
    timing: bool,
) -> list[ResultRow]:
    cell_seed = derive_seed(spec.base_seed, "tuned", dim, sep, rep)
    ds = generate_synthetic(
        SyntheticConfig(spec.n_samples, dim, sep, derive_seed(cell_seed, "data"))
    )
    train, test = split_train_test(ds, spec.test_fraction, True, derive_seed(cell_seed, "split"))
    train, test = _maybe_standardize(train, test, spec.standardize)
    cs = tuple(sorted(spec.cs))
    gammas = tuple(sorted(spec.gammas))

    # Validation splits are re-drawn per tuning run from derived seeds;
    # split_train_test carves the validation slice off the training half.
    tune_splits = [
        split_train_test(train, spec.validation_fraction, True, derive_seed(cell_seed, "val", r))
        for r in range(spec.tuning_runs)
    ]

    svm_scores = np.zeros((len(cs), len(gammas)))
    ok_scores = np.zeros(len(cs))
    for r, (sub, val) in enumerate(tune_splits):
        run_seed = derive_seed(cell_seed, "tune", r)
        svm_scores += _svm_grid_f1(sub, val, cs, gammas, run_seed, solver_cfg)
        ok_scores += _oksvm_grid_f1(sub, val, cs, run_seed, oksvm_cfg, solver_cfg)
    svm_scores /= spec.tuning_runs
    ok_scores /= spec.tuning_runs

    ci, gi = _argmax_lexicographic(svm_scores)
    svm_c, svm_gamma = cs[ci], gammas[gi]
    (ok_ci,) = _argmax_lexicographic(ok_scores)
    ok_c = cs[ok_ci]

    rows = []
    start = _clock(timing)
    ok_model, ok_state = train_oksvm(
        train, ok_c, oksvm_cfg, replace(solver_cfg, seed=derive_seed(cell_seed, "solver", "oksvm"))
    )
    ok_time = _elapsed(start)
    rows.append(ResultRow(
        "oksvm", "synthetic", dim, sep, ok_c, oksvm_cfg.gamma0, cell_seed, None,
        evaluate_model(ok_model, test), ok_state.gamma_t,
        ok_model.converged and ok_state.terminated_by != "step_cap",
        spec.standardize, ok_time,
    ))
    start = _clock(timing)
    svm_model = train_svm_baseline(
        train, svm_c, svm_gamma,
        replace(solver_cfg, seed=derive_seed(cell_seed, "solver", "svm")),
    )
    svm_time = _elapsed(start)
    rows.append(ResultRow(
        "svm", "synthetic", dim, sep, svm_c, svm_gamma, cell_seed, None,
        evaluate_model(svm_model, test), svm_gamma, svm_model.converged,
        spec.standardize, svm_time,
    ))
    return rows


def _star_tuned(task: tuple) -> list[ResultRow]:
    return _tuned_cell(*task)


def run_tuned_grid(
    spec: GridSpec,
    out: str | Path | None = None,
    *,
    oksvm_config: OksvmConfig | None = None,
    solver_config: SolverConfig | None = None,
    jobs: int = 1,
    timing: bool = False,
) -> list[ResultRow]:
    """Grid search per repetition: the baseline tunes (C, gamma) on
    validation F1 averaged over tuning runs, the gamma-learning method
    tunes only C. Ties go to the smallest (C, gamma) lexicographically.
    """
    oksvm_cfg = oksvm_config or OksvmConfig()
    solver_cfg = solver_config or SolverConfig()
    tasks = [
        (spec, dim, sep, rep, oksvm_cfg, solver_cfg, timing)
        for dim in spec.dims
        for sep in spec.seps
        for rep in range(spec.repetitions)
    ]
    rows = _run_tasks(_star_tuned, tasks, jobs)
    if out is not None:
        write_result_rows(rows, out)
    return rows


def _cv_fold(
    ds: Dataset,
    name: str,
    fold_idx: int,
    folds: FoldAssignment,
    cs: tuple[float, ...],
    gammas: tuple[float, ...],
    base_seed: int,
    standardize_features: bool,
    validation_fraction: float,
    oksvm_cfg: OksvmConfig,
    solver_cfg: SolverConfig,
    timing: bool,
) -> list[ResultRow]:
    train_all, test = folds.split(ds, fold_idx)
    train_all, test = _maybe_standardize(train_all, test, standardize_features)
    fold_seed = derive_seed(base_seed, "cv", name, fold_idx)

    sub, val = split_train_test(
        train_all, validation_fraction, True, derive_seed(fold_seed, "val")
    )

    svm_scores = _svm_grid_f1(sub, val, cs, gammas, derive_seed(fold_seed, "tune"), solver_cfg)
    ok_scores = _oksvm_grid_f1(
        sub, val, cs, derive_seed(fold_seed, "tune"), oksvm_cfg, solver_cfg
    )
    ci, gi = _argmax_lexicographic(svm_scores)
    svm_c, svm_gamma = cs[ci], gammas[gi]
    (ok_ci,) = _argmax_lexicographic(ok_scores)
    ok_c = cs[ok_ci]

    rows = []
    start = _clock(timing)
    ok_model, ok_state = train_oksvm(
        train_all, ok_c, oksvm_cfg,
        replace(solver_cfg, seed=derive_seed(fold_seed, "solver", "oksvm")),
    )
    ok_time = _elapsed(start)
    rows.append(ResultRow(
        "oksvm", name, ds.dim, None, ok_c, oksvm_cfg.gamma0, fold_seed, fold_idx,
        evaluate_model(ok_model, test), ok_state.gamma_t,
        ok_model.converged and ok_state.terminated_by != "step_cap",
        standardize_features, ok_time,
    ))
    start = _clock(timing)
    svm_model = train_svm_baseline(
        train_all, svm_c, svm_gamma,
        replace(solver_cfg, seed=derive_seed(fold_seed, "solver", "svm")),
    )
    svm_time = _elapsed(start)
    rows.append(ResultRow(
        "svm", name, ds.dim, None, svm_c, svm_gamma, fold_seed, fold_idx,
        evaluate_model(svm_model, test), svm_gamma, svm_model.converged,
        standardize_features, svm_time,
    ))
    return rows


def _star_cv(task: tuple) -> list[ResultRow]:
    return _cv_fold(*task)


@dataclass(frozen=True)
class CvSummaryRow:
    method: str
    metric: str
    mean: float
    std: float

    @property
    def formatted(self) -> str:
        return f"{self.mean:.3f}±{self.std:.3f}"


def summarize_cv(rows: Iterable[ResultRow]) -> list[CvSummaryRow]:
    """Per-method mean and population std of each metric over folds."""
    rows = list(rows)
    summary = []
    for method in METHODS:
        chosen = [r for r in rows if r.method == method]
        if not chosen:
            continue
        for metric in _SUMMARY_METRICS:
            values = [getattr(r.metrics, metric) for r in chosen]
            if any(v is None for v in values):
                continue
            arr = np.array(values, dtype=np.float64)
            summary.append(CvSummaryRow(method, metric, float(arr.mean()), float(arr.std())))
    return summary


def run_real_cv(
    ds: Dataset,
    name: str,
    out: str | Path | None = None,
    *,
    cs: Sequence[float] = REAL_C_GRID,
    gammas: Sequence[float] = REAL_GAMMA_GRID,
    k: int = 5,
    base_seed: int = 0,
    standardize_features: bool = True,
    validation_fraction: float = 0.25,
    oksvm_config: OksvmConfig | None = None,
    solver_config: SolverConfig | None = None,
    jobs: int = 1,
    timing: bool = False,
) -> tuple[list[ResultRow], list[CvSummaryRow]]:
    """Stratified k-fold CV with per-fold tuning on a validation slice.

    Standardization parameters are fit inside each fold's training
    portion only, so the test fold never leaks into preprocessing.
    """
    cs = tuple(sorted(cs))
    gammas = tuple(sorted(gammas))
    oksvm_cfg = oksvm_config or OksvmConfig()
    solver_cfg = solver_config or SolverConfig()
    folds = stratified_kfold(ds, k, derive_seed(base_seed, "folds", name))
    tasks = [
        (
            ds, name, fold_idx, folds, cs, gammas, base_seed,
            standardize_features, validation_fraction, oksvm_cfg, solver_cfg, timing,
        )
        for fold_idx in range(k)
    ]
    rows = _run_tasks(_star_cv, tasks, jobs)
    summary = summarize_cv(rows)
    if out is not None:
        write_result_rows(rows, out)
    return rows, summary


def write_cv_summary(summary: Iterable[CvSummaryRow], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "metric", "mean", "std", "formatted"])
        for row in summary:
            writer.writerow([row.method, row.metric, repr(row.mean), repr(row.std), row.formatted])


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_result_rows(rows: Iterable[ResultRow], path: str | Path) -> None:
    """Long-format results CSV; floats as shortest round-trip decimals."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in rows:
            m = r.metrics
            writer.writerow([_cell(v) for v in (
                r.method, r.dataset, r.dim, r.sep, r.c, r.gamma0, r.seed, r.fold,
                m.acc, m.precision, m.recall, m.f1, m.auc, m.tp, m.fp, m.tn, m.fn,
                r.final_gamma, r.converged, r.standardized, r.wall_time,
            )])


def load_result_rows(path: str | Path) -> list[ResultRow]:
    """Inverse of write_result_rows."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(RESULT_COLUMNS):
            raise DataError(f"{path}: not a results file (header {header})")
        rows = []
        for cells in reader:
            if not cells:
                continue
            rec = dict(zip(RESULT_COLUMNS, cells))
            metrics = MetricsRecord(
                acc=float(rec["acc"]), precision=float(rec["precision"]),
                recall=float(rec["recall"]), f1=float(rec["f1"]),
                tp=int(rec["tp"]), fp=int(rec["fp"]), tn=int(rec["tn"]), fn=int(rec["fn"]),
                auc=float(rec["auc"]) if rec["auc"] else None,
            )
            rows.append(ResultRow(
                method=rec["method"], dataset=rec["dataset"], dim=int(rec["dim"]),
                sep=float(rec["sep"]) if rec["sep"] else None,
                c=float(rec["c"]), gamma0=float(rec["gamma0"]), seed=int(rec["seed"]),
                fold=int(rec["fold"]) if rec["fold"] else None,
                metrics=metrics, final_gamma=float(rec["final_gamma"]),
                converged=rec["converged"] == "1", standardized=rec["standardized"] == "1",
                wall_time=float(rec["wall_time"]) if rec["wall_time"] else None,
            ))
    return rows


_HEATMAP_AXES = ("dataset", "dim", "sep", "c", "gamma0", "fold")
_HEATMAP_VALUES = ("acc", "precision", "recall", "f1", "auc", "f1_diff", "wlr")


def _axis_key(row: ResultRow, axes: Sequence[str]) -> tuple:
    return tuple(getattr(row, a) for a in axes)


def _sort_key(key: tuple) -> tuple:
    return tuple((v is None, v) for v in key)


def _mean_metric(rows: Sequence[ResultRow], metric: str) -> float:
    values = [getattr(r.metrics, metric) for r in rows]
    if any(v is None for v in values):
        raise ValueError(f"{metric} missing from some rows")
    return float(np.mean(values))


def emit_heatmap_csv(
    rows: Sequence[ResultRow],
    group_by: Sequence[str],
    value: str,
    out: str | Path,
) -> None:
    """Aggregate result rows into one long-format cell CSV.

    Plain metrics average per (cell, method). "f1_diff" is 100 times the
    gap of mean F1 between the two methods per cell; "wlr" pairs the two
    methods run by run within each cell and averages the signs.
    """
    if not rows:
        raise ValueError("no rows to aggregate")
    axes = tuple(group_by)
    for a in axes:
        if a not in _HEATMAP_AXES:
            raise ValueError(f"unknown axis {a!r}; known: {_HEATMAP_AXES}")
    if value not in _HEATMAP_VALUES:
        raise ValueError(f"unknown metric {value!r}; known: {_HEATMAP_VALUES}")

    cells: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        cells.setdefault(_axis_key(r, axes), []).append(r)

    out_rows: list[list] = []
    if value in _SUMMARY_METRICS:
        header = [*axes, "method", "value", "n"]
        for key in sorted(cells, key=_sort_key):
            for method in METHODS:
                chosen = [r for r in cells[key] if r.method == method]
                if chosen:
                    out_rows.append([*key, method, _mean_metric(chosen, value), len(chosen)])
    else:
        header = [*axes, "value", "n"]
        for key in sorted(cells, key=_sort_key):
            ok = [r for r in cells[key] if r.method == "oksvm"]
            svm = [r for r in cells[key] if r.method == "svm"]
            if not ok or not svm:
                raise ValueError(f"cell {key} lacks rows for one method; cannot pair")
            if value == "f1_diff":
                cell_value = f1_diff(_mean_metric(ok, "f1"), _mean_metric(svm, "f1"))
                out_rows.append([*key, cell_value, min(len(ok), len(svm))])
            else:
                by_run_ok = {(r.seed, r.fold): r.metrics.f1 for r in ok}
                by_run_svm = {(r.seed, r.fold): r.metrics.f1 for r in svm}
                if set(by_run_ok) != set(by_run_svm):
                    raise ValueError(f"cell {key} is not fully paired across methods")
                diffs = [
                    f1_diff(by_run_ok[run], by_run_svm[run]) for run in sorted(
                        by_run_ok, key=_sort_key
                    )
                ]
                out_rows.append([*key, wins_losses_ratio(diffs), len(diffs)])

    with Path(out).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in out_rows:
            writer.writerow([_cell(v) for v in row])
