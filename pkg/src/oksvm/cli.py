"""Command-line front end.

Subcommands: generate, train, grid-fixed, grid-tuned, cv, heatmap.
Every flag can also be set from a key=value config file via --config;
flags given on the command line override the file. Exit codes: 0 ok,
1 usage error, 2 data error, 3 non-convergence under --strict.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset import SyntheticConfig, generate_synthetic, load_csv, save_csv, split_train_test
from .errors import DataError, NonConvergenceError
from .harness import (
    DATASET_PRESETS,
    REAL_C_GRID,
    REAL_GAMMA_GRID,
    SYNTH_C_GRID,
    SYNTH_DIMS,
    SYNTH_GAMMA_GRID,
    SYNTH_SEPS,
    GridSpec,
    emit_heatmap_csv,
    evaluate_model,
    load_preset,
    load_result_rows,
    run_fixed_grid,
    run_real_cv,
    run_tuned_grid,
    write_cv_summary,
)
from .optimizer import OksvmConfig, export_trace_csv, train_oksvm, train_svm_baseline
from .solver import SolverConfig, save_model


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the documented contract
    # reserves 2 for data errors, so route usage failures through 1
    def error(self, message: str):  # noqa: D401
        raise _UsageError(f"{self.prog}: {message}")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v)


def _names(text: str) -> tuple[str, ...]:
    return tuple(v for v in text.split(",") if v)


def _read_config_flags(path: str) -> list[str]:
    """Turn key=value lines into CLI tokens; booleans become flag pairs."""
    file = Path(path)
    if not file.exists():
        raise _UsageError(f"config file not found: {path}")
    flags: list[str] = []
    for lineno, raw in enumerate(file.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "false"):
            flags.append(f"--{key}" if value.lower() == "true" else f"--no-{key}")
        else:
            flags.extend((f"--{key}", value))
    return flags


def _apply_config(argv: list[str]) -> list[str]:
    """Splice config-file flags in right after the subcommand, so flags
    typed on the command line come later and win."""
    config_path = None
    for pos, token in enumerate(argv):
        if token == "--config" and pos + 1 < len(argv):
            config_path = argv[pos + 1]
            break
        if token.startswith("--config="):
            config_path = token.partition("=")[2]
            break
    if config_path is None or not argv:
        return argv
    return [argv[0], *_read_config_flags(config_path), *argv[1:]]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override it")


def _add_oksvm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta0", type=float, default=0.01)
    p.add_argument("--zeta-plus", type=float, default=1.01)
    p.add_argument("--zeta-minus", type=float, default=0.1)
    p.add_argument("--gamma-max", type=float, default=1000.0)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--ws-limit", type=int, default=5)
    p.add_argument("--max-outer-steps", type=int, default=500)
    p.add_argument("--warm-start", action=argparse.BooleanOptionalAction, default=True)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kkt-tolerance", type=float, default=1e-3)
    p.add_argument("--max-passes", type=int, default=5)
    p.add_argument("--solver-seed", type=int, default=0)


def _oksvm_config(args: argparse.Namespace, gamma0: float) -> OksvmConfig:
    return OksvmConfig(
        gamma0=gamma0,
        eta0=args.eta0,
        zeta_plus=args.zeta_plus,
        zeta_minus=args.zeta_minus,
        gamma_max=args.gamma_max,
        epsilon=args.epsilon,
        ws_limit=args.ws_limit,
        max_outer_steps=args.max_outer_steps,
        warm_start=args.warm_start,
    )


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        kkt_tolerance=args.kkt_tolerance,
        max_passes=args.max_passes,
        seed=args.solver_seed,
    )


def _load_any(args: argparse.Namespace):
    """Dataset from --preset (canonical benchmark CSV) or a custom --data."""
    if args.preset:
        return load_preset(args.preset, args.data_dir), args.preset
    if not args.data:
        raise _UsageError("one of --preset or --data is required")
    keep = _names(args.keep_labels) if args.keep_labels else None
    ds = load_csv(
        args.data,
        args.label_column,
        args.positive_label,
        keep_labels=keep,
        threshold=args.threshold,
        drop_incomplete=args.drop_incomplete,
    )
    return ds, Path(args.data).stem


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(DATASET_PRESETS))
    p.add_argument("--data-dir", default="data")
    p.add_argument("--data", help="custom CSV path (header row required)")
    p.add_argument("--label-column", default="label")
    p.add_argument("--positive-label", default="1")
    p.add_argument("--keep-labels", help="comma-separated raw labels to keep")
    p.add_argument("--threshold", type=float, help="binarize numeric labels at value > threshold")
    p.add_argument("--drop-incomplete", action=argparse.BooleanOptionalAction, default=False)


def _cmd_generate(args: argparse.Namespace) -> int:
    ds = generate_synthetic(SyntheticConfig(args.n_samples, args.dim, args.sep, args.seed))
    save_csv(ds, args.out)
    print(f"wrote {ds.n_samples} samples ({ds.dim} features) to {args.out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    ds, name = _load_any(args)
    train, test = split_train_test(ds, args.test_fraction, True, args.split_seed)
    if args.standardize:
        from .dataset import standardize

        train, (test,) = standardize(train, [test])
    solver_cfg = _solver_config(args)
    if args.method == "oksvm":
        model, state = train_oksvm(train, args.c, _oksvm_config(args, args.gamma), solver_cfg)
        if args.trace_out:
            export_trace_csv(state.trace, args.trace_out)
        extra = f" final_gamma={state.gamma_t:.6g} terminated_by={state.terminated_by}"
        unconverged = not model.converged or state.terminated_by == "step_cap"
    else:
        model = train_svm_baseline(train, args.c, args.gamma, solver_cfg)
        extra = ""
        unconverged = not model.converged
    metrics = evaluate_model(model, test)
    auc_text = "" if metrics.auc is None else f" auc={metrics.auc:.4f}"
    print(
        f"{args.method} on {name}: acc={metrics.acc:.4f} precision={metrics.precision:.4f} "
        f"recall={metrics.recall:.4f} f1={metrics.f1:.4f}{auc_text} "
        f"support={model.n_support}{extra}"
    )
    if args.model_out:
        save_model(model, args.model_out)
        print(f"model written to {args.model_out}")
    if args.strict and unconverged:
        raise NonConvergenceError("training did not converge")
    return 0


def _grid_spec(args: argparse.Namespace) -> GridSpec:
    return GridSpec(
        dims=args.dims,
        seps=args.seps,
        cs=args.cs,
        gammas=args.gammas,
        repetitions=args.repetitions,
        base_seed=args.base_seed,
        test_fraction=args.test_fraction,
        n_samples=args.n_samples,
        standardize=args.standardize,
        validation_fraction=args.validation_fraction,
        tuning_runs=args.tuning_runs,
    )


def _check_strict(args: argparse.Namespace, rows) -> None:
    if args.strict:
        bad = sum(1 for r in rows if not r.converged)
        if bad:
            raise NonConvergenceError(f"{bad} of {len(rows)} runs did not converge")


def _cmd_grid_fixed(args: argparse.Namespace) -> int:
    rows = run_fixed_grid(
        _grid_spec(args), args.out,
        oksvm_config=_oksvm_config(args, 1.0),
        solver_config=_solver_config(args),
        jobs=args.jobs, timing=args.timing,
    )
    print(f"wrote {len(rows)} rows to {args.out}")
    _check_strict(args, rows)
    return 0


def _cmd_grid_tuned(args: argparse.Namespace) -> int:
    rows = run_tuned_grid(
        _grid_spec(args), args.out,
        oksvm_config=_oksvm_config(args, args.gamma0),
        solver_config=_solver_config(args),
        jobs=args.jobs, timing=args.timing,
    )
    print(f"wrote {len(rows)} rows to {args.out}")
    _check_strict(args, rows)
    return 0


def _cmd_cv(args: argparse.Namespace) -> int:
    ds, name = _load_any(args)
    rows, summary = run_real_cv(
        ds, name, args.out,
        cs=args.cs, gammas=args.gammas, k=args.k,
        base_seed=args.base_seed,
        standardize_features=args.standardize,
        validation_fraction=args.validation_fraction,
        oksvm_config=_oksvm_config(args, args.gamma0),
        solver_config=_solver_config(args),
        jobs=args.jobs, timing=args.timing,
    )
    if args.summary_out:
        write_cv_summary(summary, args.summary_out)
    metrics_order = ["acc", "precision", "recall", "f1", "auc"]
    print(f"{name}: {args.k}-fold CV")
    print("method " + " ".join(f"{m:>13}" for m in metrics_order))
    for method in ("oksvm", "svm"):
        cells = {s.metric: s.formatted for s in summary if s.method == method}
        print(f"{method:<6} " + " ".join(f"{cells.get(m, '-'):>13}" for m in metrics_order))
    _check_strict(args, rows)
    return 0


def _cmd_heatmap(args: argparse.Namespace) -> int:
    rows = load_result_rows(args.rows)
    emit_heatmap_csv(rows, args.group_by, args.value, args.out)
    print(f"wrote heatmap cells to {args.out}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="oksvm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[], help="write a synthetic dataset CSV")
    _add_common(p)
    p.add_argument("--n-samples", type=int, default=200)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--sep", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("train", help="train one model and print test metrics")
    _add_common(p)
    _add_data_flags(p)
    p.add_argument("--method", choices=("oksvm", "svm"), default="oksvm")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0,
                   help="fixed gamma for svm, starting gamma for oksvm")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--model-out")
    p.add_argument("--trace-out")
    p.add_argument("--strict", action="store_true")
    _add_oksvm_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_train)

    for cmd, helptext in (
        ("grid-fixed", "both methods at every fixed (C, gamma) cell"),
        ("grid-tuned", "grid search per repetition, then a final paired run"),
    ):
        p = sub.add_parser(cmd, help=helptext)
        _add_common(p)
        p.add_argument("--dims", type=_ints, default=SYNTH_DIMS)
        p.add_argument("--seps", type=_floats, default=SYNTH_SEPS)
        p.add_argument("--cs", type=_floats, default=SYNTH_C_GRID)
        p.add_argument("--gammas", type=_floats, default=SYNTH_GAMMA_GRID)
        p.add_argument("--repetitions", type=int, default=20,
                       help="paired runs per cell (100 restores full scale)")
        p.add_argument("--base-seed", type=int, default=0)
        p.add_argument("--test-fraction", type=float, default=0.5)
        p.add_argument("--n-samples", type=int, default=200)
        p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=False)
        p.add_argument("--validation-fraction", type=float, default=0.25)
        p.add_argument("--tuning-runs", type=int, default=10)
        p.add_argument("--gamma0", type=float, default=1.0,
                       help="starting gamma when it is not a grid axis")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--timing", action="store_true",
                       help="fill wall_time (reruns stop being byte-identical)")
        p.add_argument("--strict", action="store_true")
        p.add_argument("--out", required=True)
        _add_oksvm_flags(p)
        _add_solver_flags(p)
        p.set_defaults(func=_cmd_grid_fixed if cmd == "grid-fixed" else _cmd_grid_tuned)

    p = sub.add_parser("cv", help="stratified k-fold CV on a real dataset")
    _add_common(p)
    _add_data_flags(p)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--cs", type=_floats, default=REAL_C_GRID)
    p.add_argument("--gammas", type=_floats, default=REAL_GAMMA_GRID)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--validation-fraction", type=float, default=0.25)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--summary-out")
    _add_oksvm_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("heatmap", help="aggregate a results CSV into cells")
    _add_common(p)
    p.add_argument("--rows", required=True, help="results CSV from a grid or cv run")
    p.add_argument("--group-by", type=_names, required=True)
    p.add_argument("--value", required=True,
                   help="acc, precision, recall, f1, auc, f1_diff, or wlr")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_heatmap)

    return parser


def main(argv: list[str] | None = None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _build_parser().parse_args(_apply_config(raw))
        return args.func(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except DataError as err:
        # must precede ValueError: DataError subclasses it
        print(f"data error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except NonConvergenceError as err:
        print(f"non-convergence: {err}", file=sys.stderr)
        return 3
    except SystemExit as status:
        # argparse --help lands here
        code = status.code
        return int(code) if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
