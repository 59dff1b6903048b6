"""Soft-margin SVM dual optimization and the kernel decision function.

``solve_dual`` is a simplified SMO: sweep over samples, pick a KKT
violator as the first index, draw the second uniformly from the rest
(seeded, so solves are reproducible), and solve the two-multiplier
subproblem in closed form. Pair updates preserve the box constraint
exactly and the equality constraint to rounding error, so feasibility
never has to be repaired afterwards.

``solve_dual_bruteforce`` is a deliberately simple projected-gradient
oracle for test-scale problems. It shares no code with the SMO path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .kernel import KernelCache, cross_squared_distances, rbf_kernel_row

_SUPPORT_THRESHOLD = 1e-8

# Minimum movement of the second multiplier for a pair update to count,
# as in Platt's original stopping heuristics.
_MIN_ALPHA_STEP = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and caps for solve_dual.

    max_iterations bounds the number of attempted pair updates; None
    means 10*N^2, scaled at solve time. The seed drives second-index
    selection only.
    """

    kkt_tolerance: float = 1e-3
    max_passes: int = 5
    max_iterations: int | None = None
    support_threshold: float = _SUPPORT_THRESHOLD
    equality_tolerance: float = 1e-10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kkt_tolerance <= 0 or self.support_threshold <= 0 or self.equality_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_passes < 1 or (self.max_iterations is not None and self.max_iterations < 1):
            raise ValueError("iteration caps must be positive")


@dataclass(frozen=True)
class SvmModel:
    """A solved dual: multipliers, bias, and the data they refer to.

    training_features may be None for models solved from a bare kernel
    matrix (oracle tests); such models cannot score new points.
    source_indices carries original row ids for models reloaded from
    disk, where only the rows with nonzero alpha were stored.
    """

    alphas: np.ndarray = field(repr=False)
    bias: float
    support_indices: np.ndarray = field(repr=False)
    gamma: float
    c: float
    training_features: np.ndarray | None = field(repr=False)
    training_labels: np.ndarray = field(repr=False)
    converged: bool = True
    bias_fallback: bool = False
    source_indices: np.ndarray | None = field(default=None, repr=False)
    dual_trace: tuple[float, ...] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        alphas = np.ascontiguousarray(self.alphas, dtype=np.float64)
        labels = np.ascontiguousarray(self.training_labels, dtype=np.int64)
        support = np.ascontiguousarray(self.support_indices, dtype=np.intp)
        if self.gamma <= 0 or self.c <= 0:
            raise ValueError(f"gamma and c must be positive, got {self.gamma}, {self.c}")
        if alphas.shape != labels.shape:
            raise ValueError("alphas and labels must have equal length")
        if alphas.min(initial=0.0) < 0.0 or alphas.max(initial=0.0) > self.c:
            raise ValueError("alphas violate the box constraint")
        balance = float(labels @ alphas)
        if abs(balance) > 1e-8 * max(1.0, self.c):
            raise ValueError(f"alphas violate the equality constraint: sum(y*a) = {balance}")
        if support.size == 0:
            raise DataError("degenerate model: no support vectors")
        if support.min() < 0 or support.max() >= alphas.size:
            raise ValueError("support indices out of range")
        feats = self.training_features
        if feats is not None:
            feats = np.ascontiguousarray(feats, dtype=np.float64)
            if feats.shape[0] != alphas.size:
                raise ValueError("training_features row count must match alphas")
            feats.setflags(write=False)
        for arr in (alphas, labels, support):
            arr.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "training_labels", labels)
        object.__setattr__(self, "support_indices", support)
        object.__setattr__(self, "training_features", feats)

    @property
    def n_support(self) -> int:
        return self.support_indices.size


def dual_objective(alphas: np.ndarray, labels: np.ndarray, kernel: KernelCache) -> float:
    """Value of the dual: sum(a) - 1/2 * sum_ij a_i a_j y_i y_j k_ij."""
    a = np.asarray(alphas, dtype=np.float64)
    v = a * np.asarray(labels, dtype=np.float64)
    return float(a.sum() - 0.5 * (v @ kernel.k @ v))


def _check_two_classes(labels: np.ndarray) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    if not (np.any(y == 1.0) and np.any(y == -1.0)):
        raise DataError("single-class input: the equality constraint forces alpha = 0")
    return y


def _recover_bias(
    alphas: np.ndarray,
    y: np.ndarray,
    k: np.ndarray,
    c: float,
    support_threshold: float,
) -> tuple[float, bool]:
    """Bias as the mean residual over margin SVs; all SVs as a fallback."""
    scores = (alphas * y) @ k
    support = alphas > support_threshold
    if not support.any():
        raise DataError("degenerate model: no support vectors")
    margin = support & (alphas < c - support_threshold)
    chosen = margin if margin.any() else support
    bias = float(np.mean(y[chosen] - scores[chosen]))
    return bias, not margin.any()


def compute_bias(model: SvmModel, kernel: KernelCache, support_threshold: float = _SUPPORT_THRESHOLD) -> float:
    """Recompute the bias of a model against its own kernel matrix."""
    y = model.training_labels.astype(np.float64)
    bias, _ = _recover_bias(model.alphas, y, kernel.k, model.c, support_threshold)
    return bias


def solve_dual(
    kernel: KernelCache,
    labels: np.ndarray,
    c: float,
    config: SolverConfig | None = None,
    warm_start: np.ndarray | None = None,
    *,
    features: np.ndarray | None = None,
    record_dual: bool = False,
) -> SvmModel:
    """Maximize the dual by SMO pair updates.

    A sample i violates KKT when y_i*E_i < -tol with a_i < C (should
    grow) or y_i*E_i > tol with a_i > 0 (should shrink), where E_i is the
    cached decision error. The cache is updated in O(N) per pair update
    and rebuilt at every sweep start so rounding drift cannot accumulate.

    Exits after max_passes consecutive sweeps without an update. Hitting
    the iteration cap instead returns the best-so-far model flagged
    converged=False; callers that loop over solves keep going.
    """
    if config is None:
        config = SolverConfig()
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    y = _check_two_classes(labels)
    k = kernel.k
    n = y.size
    if k.shape[0] != n:
        raise ValueError(f"kernel is {k.shape[0]}x{k.shape[0]} but got {n} labels")

    if warm_start is None:
        alphas = np.zeros(n)
    else:
        alphas = np.array(warm_start, dtype=np.float64)
        if alphas.shape != (n,):
            raise DataError(f"warm start length {alphas.shape} does not match N={n}")
        if alphas.min() < 0 or alphas.max() > c or abs(y @ alphas) > 1e-8 * max(1.0, c):
            raise DataError("warm start is infeasible")

    rng = np.random.default_rng(config.seed)
    tol = config.kkt_tolerance
    max_attempts = config.max_iterations if config.max_iterations is not None else 10 * n * n
    bias = 0.0
    attempts = 0
    clean_sweeps = 0
    converged = True
    trace: list[float] = []

    while clean_sweeps < config.max_passes:
        errors = (alphas * y) @ k + bias - y
        changed = 0
        for i in range(n):
            e_i = errors[i]
            r = e_i * y[i]
            if not ((r < -tol and alphas[i] < c) or (r > tol and alphas[i] > 0)):
                continue
            # second index: random start, then rotate through the rest,
            # so one unproductive draw cannot make the sweep look clean
            start = int(rng.integers(n - 1))
            for offset in range(n - 1):
                attempts += 1
                if attempts > max_attempts:
                    converged = False
                    break
                j = (i + 1 + (start + offset) % (n - 1)) % n
                e_j = errors[j]
                a_i_old = alphas[i]
                a_j_old = alphas[j]
                if y[i] != y[j]:
                    low = max(0.0, a_j_old - a_i_old)
                    high = min(c, c + a_j_old - a_i_old)
                else:
                    low = max(0.0, a_i_old + a_j_old - c)
                    high = min(c, a_i_old + a_j_old)
                if low >= high:
                    continue
                curvature = 2.0 * k[i, j] - k[i, i] - k[j, j]
                if curvature >= 0:
                    # flat or concave-up pair; the simplified scheme skips it
                    continue
                a_j = a_j_old - y[j] * (e_i - e_j) / curvature
                a_j = min(high, max(low, a_j))
                if abs(a_j - a_j_old) < _MIN_ALPHA_STEP:
                    continue
                a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j)
                a_i = min(c, max(0.0, a_i))
                d_i = y[i] * (a_i - a_i_old)
                d_j = y[j] * (a_j - a_j_old)
                b1 = bias - e_i - d_i * k[i, i] - d_j * k[i, j]
                b2 = bias - e_j - d_i * k[i, j] - d_j * k[j, j]
                if 0.0 < a_i < c:
                    new_bias = b1
                elif 0.0 < a_j < c:
                    new_bias = b2
                else:
                    new_bias = 0.5 * (b1 + b2)
                errors += d_i * k[i] + d_j * k[j] + (new_bias - bias)
                alphas[i] = a_i
                alphas[j] = a_j
                bias = new_bias
                changed += 1
                if record_dual:
                    trace.append(dual_objective(alphas, y, kernel))
                break
            if not converged:
                break
        if not converged:
            break
        clean_sweeps = clean_sweeps + 1 if changed == 0 else 0

    support = np.flatnonzero(alphas > config.support_threshold)
    final_bias, fallback = _recover_bias(alphas, y, k, c, config.support_threshold)
    return SvmModel(
        alphas=alphas,
        bias=final_bias,
        support_indices=support,
        gamma=kernel.gamma,
        c=c,
        training_features=features,
        training_labels=np.asarray(labels, dtype=np.int64),
        converged=converged,
        bias_fallback=fallback,
        dual_trace=tuple(trace) if record_dual else None,
    )


def _project_box_equality(v: np.ndarray, y: np.ndarray, c: float) -> np.ndarray:
    """Euclidean projection onto {0 <= a <= c, y @ a = 0}.

    The projection has the form a = clip(v - lam*y, 0, c) where
    g(lam) = y @ a(lam) is piecewise linear and nonincreasing, constant
    outside the breakpoint range, positive on the left and negative on
    the right (both classes present). Scan the breakpoints for the sign
    change and interpolate on that segment, which is exact.
    """
    bps = np.unique(np.concatenate([y * v, y * (v - c)]))
    a_at = np.clip(v[None, :] - bps[:, None] * y[None, :], 0.0, c)
    g = a_at @ y
    cross = int(np.argmax(g <= 0.0))
    if g[cross] == 0.0:
        lam = bps[cross]
    else:
        lo, hi = bps[cross - 1], bps[cross]
        lam = lo + g[cross - 1] * (hi - lo) / (g[cross - 1] - g[cross])
    return np.clip(v - lam * y, 0.0, c)


def _polish_active_set(alpha: np.ndarray, q: np.ndarray, y: np.ndarray, c: float) -> np.ndarray | None:
    """Exactly solve the QP restricted to the active set guessed from alpha.

    Returns None unless the candidate passes feasibility and the KKT sign
    conditions, so a wrong guess can never make the oracle worse.
    """
    tol = 1e-6 * max(1.0, c)
    at_zero = alpha <= tol
    at_c = alpha >= c - tol
    free = ~(at_zero | at_c)
    if not free.any():
        return None
    base = np.where(at_c, c, 0.0)
    f_idx = np.flatnonzero(free)
    nf = f_idx.size
    system = np.zeros((nf + 1, nf + 1))
    system[:nf, :nf] = q[np.ix_(f_idx, f_idx)]
    system[:nf, nf] = y[f_idx]
    system[nf, :nf] = y[f_idx]
    rhs = np.empty(nf + 1)
    rhs[:nf] = 1.0 - q[f_idx] @ base
    rhs[nf] = -float(y @ base)
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return None
    a_free, nu = solution[:nf], solution[nf]
    if a_free.min(initial=c) < -1e-9 or a_free.max(initial=0.0) > c + 1e-9:
        return None
    candidate = base.copy()
    candidate[f_idx] = np.clip(a_free, 0.0, c)
    reduced = (1.0 - q @ candidate) - nu * y
    kkt_tol = 1e-7 * max(1.0, c)
    if np.any(reduced[at_zero] > kkt_tol) or np.any(reduced[at_c] < -kkt_tol):
        return None
    return candidate


def solve_dual_bruteforce(
    kernel: KernelCache,
    labels: np.ndarray,
    c: float,
    steps: int = 20000,
) -> np.ndarray:
    """Projected-gradient ascent on the dual, for test-scale problems.

    Fixed step 1/lambda_max with Nesterov momentum and gradient restarts;
    every iterate is projected exactly, so feasibility holds throughout.
    A final active-set polish solves the identified face exactly when its
    KKT check passes. Intended as an independent oracle, N <= 16.
    """
    y = _check_two_classes(labels)
    n = y.size
    if n > 16:
        raise ValueError(f"oracle is restricted to N <= 16, got N={n}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    q = (y[:, None] * y[None, :]) * kernel.k
    lam_max = float(np.linalg.eigvalsh(q)[-1])
    step = 1.0 / max(lam_max, 1e-12)

    x = np.zeros(n)
    z = x.copy()
    momentum = 1.0
    stalled = 0
    for _ in range(steps):
        x_new = _project_box_equality(z + step * (1.0 - q @ z), y, c)
        if float((z - x_new) @ (x_new - x)) > 0.0:
            # momentum points uphill in the wrong direction; restart
            momentum = 1.0
            z = x_new.copy()
        else:
            momentum_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum * momentum))
            z = x_new + ((momentum - 1.0) / momentum_new) * (x_new - x)
            momentum = momentum_new
        stalled = stalled + 1 if np.max(np.abs(x_new - x)) < 1e-14 else 0
        x = x_new
        if stalled >= 20:
            break

    def value(a: np.ndarray) -> float:
        return float(a.sum() - 0.5 * (a @ q @ a))

    polished = _polish_active_set(x, q, y, c)
    if polished is not None and value(polished) >= value(x):
        return polished
    return x


def decision_values(model: SvmModel, test_features: np.ndarray) -> np.ndarray:
    """Kernel decision scores: sum over support vectors plus bias."""
    if model.training_features is None:
        raise DataError("model carries no training features; cannot score new points")
    x = np.asarray(test_features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.training_features.shape[1]:
        raise DataError(
            f"test features have shape {x.shape}, expected (*, {model.training_features.shape[1]})"
        )
    sv = model.support_indices
    d2 = cross_squared_distances(x, model.training_features[sv])
    k = rbf_kernel_row(d2, model.gamma)
    weights = model.alphas[sv] * model.training_labels[sv].astype(np.float64)
    return k @ weights + model.bias


def predict(model: SvmModel, test_features: np.ndarray) -> np.ndarray:
    """Signs of the decision values; an exact zero scores as +1."""
    scores = decision_values(model, test_features)
    return np.where(scores >= 0.0, 1, -1).astype(np.int64)


def save_model(model: SvmModel, path: str | Path) -> None:
    """Serialize a model as key=value headers plus one CSV row per
    nonzero multiplier.

    Floats are written with 17 significant digits, which round-trips
    float64 exactly: save(load(save(m))) is byte-identical to save(m).
    Zero-alpha rows contribute nothing to the decision function and are
    dropped.
    """
    if model.training_features is None:
        raise DataError("model carries no training features; nothing to serialize")
    keep = np.flatnonzero(model.alphas != 0.0)
    ids = model.source_indices if model.source_indices is not None else np.arange(model.alphas.size)
    lines = [
        "format=svm-model-v1",
        f"gamma={model.gamma:.17g}",
        f"c={model.c:.17g}",
        f"bias={model.bias:.17g}",
        f"converged={int(model.converged)}",
        f"bias_fallback={int(model.bias_fallback)}",
        f"n_features={model.training_features.shape[1]}",
        f"n_rows={keep.size}",
    ]
    for i in keep:
        cells = [str(int(ids[i])), f"{model.alphas[i]:.17g}", str(int(model.training_labels[i]))]
        cells += [f"{v:.17g}" for v in model.training_features[i]]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> SvmModel:
    """Inverse of save_model; the result scores new points identically."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != "format=svm-model-v1":
        raise DataError(f"{path}: not a model file")
    header: dict[str, str] = {}
    row_start = 0
    for pos, line in enumerate(text[1:], start=1):
        if "=" not in line:
            row_start = pos
            break
        key, _, value = line.partition("=")
        header[key] = value
        row_start = pos + 1
    try:
        n_features = int(header["n_features"])
        n_rows = int(header["n_rows"])
    except KeyError as missing:
        raise DataError(f"{path}: missing header key {missing}") from None
    rows = text[row_start : row_start + n_rows]
    if len(rows) != n_rows:
        raise DataError(f"{path}: expected {n_rows} rows, found {len(rows)}")
    ids = np.empty(n_rows, dtype=np.intp)
    alphas = np.empty(n_rows)
    labels = np.empty(n_rows, dtype=np.int64)
    feats = np.empty((n_rows, n_features))
    for r, line in enumerate(rows):
        cells = line.split(",")
        if len(cells) != 3 + n_features:
            raise DataError(f"{path}: malformed row {r}")
        ids[r] = int(cells[0])
        alphas[r] = float(cells[1])
        labels[r] = int(cells[2])
        feats[r] = [float(v) for v in cells[3:]]
    return SvmModel(
        alphas=alphas,
        bias=float(header["bias"]),
        support_indices=np.flatnonzero(alphas > _SUPPORT_THRESHOLD),
        gamma=float(header["gamma"]),
        c=float(header["c"]),
        training_features=feats,
        training_labels=labels,
        converged=bool(int(header["converged"])),
        bias_fallback=bool(int(header["bias_fallback"])),
        source_indices=ids,
    )
