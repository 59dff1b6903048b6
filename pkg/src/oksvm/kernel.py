"""RBF kernel evaluation over cached pairwise squared distances.

Squared distances depend only on the data, so they are computed once and
reused for every gamma. A gamma update then costs one elementwise
exponential, which is what makes the gamma-descent loop cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric matrix of pairwise squared Euclidean distances.

    Diagonal is exactly zero, off-diagonal entries are clamped to be
    nonnegative (Gram-expansion cancellation can produce tiny negatives).
    """

    d2: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        d2 = np.asarray(self.d2, dtype=np.float64)
        if d2.ndim != 2 or d2.shape[0] != d2.shape[1]:
            raise ValueError(f"d2 must be square, got shape {d2.shape}")
        if not np.array_equal(d2, d2.T):
            raise ValueError("d2 must be exactly symmetric")
        if np.any(np.diagonal(d2) != 0.0):
            raise ValueError("d2 diagonal must be exactly zero")
        if d2.min(initial=0.0) < 0.0:
            raise ValueError("d2 entries must be nonnegative")
        object.__setattr__(self, "d2", _frozen(d2))

    @property
    def n(self) -> int:
        return self.d2.shape[0]


@dataclass(frozen=True)
class KernelCache:
    """A DistanceMatrix paired with exp(-gamma * d2) for one gamma."""

    d2: DistanceMatrix
    gamma: float
    k: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.d2.n

    def at_gamma(self, gamma: float) -> "KernelCache":
        """Rebuild the kernel matrix at a new gamma; distances are reused."""
        return rbf_kernel_matrix(self.d2, gamma)


def squared_distance_matrix(features: np.ndarray) -> DistanceMatrix:
    """All-pairs ‖x_i - x_j‖² via the Gram expansion.

    The raw expansion is not exactly symmetric in floating point, so the
    strict upper triangle is mirrored; the diagonal is written as zero.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"features must be a nonempty 2-D matrix, got shape {x.shape}")
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    upper = np.triu(d2, 1)
    return DistanceMatrix(upper + upper.T)


def cross_squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """‖a_i - b_j‖² for rows of two matrices, clamped at zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    sq_a = np.einsum("ij,ij->i", a, a)
    sq_b = np.einsum("ij,ij->i", b, b)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (a @ b.T)
    return np.maximum(d2, 0.0)


def rbf_kernel_matrix(d2: DistanceMatrix, gamma: float, *, allow_zero: bool = False) -> KernelCache:
    """Build exp(-gamma * d2) as a KernelCache.

    gamma must be positive; gamma = 0 (an all-ones matrix) is allowed only
    when ``allow_zero`` is set, which tests use to probe limiting behavior.
    Very large gamma underflows gracefully to 0, never to NaN.
    """
    if gamma < 0 or (gamma == 0 and not allow_zero):
        raise ValueError(f"gamma must be positive, got {gamma}")
    k = np.exp(-gamma * d2.d2)
    return KernelCache(d2, float(gamma), _frozen(k))


def rbf_kernel_row(d2_row: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * d2) elementwise for precomputed squared distances.

    Scores test samples against support vectors row by row, avoiding an
    N_test x N_train kernel matrix.
    """
    return np.exp(-gamma * np.asarray(d2_row, dtype=np.float64))
