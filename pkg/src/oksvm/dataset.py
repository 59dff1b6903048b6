"""Datasets: synthetic generation, CSV ingestion, splits, and folds.

All randomness flows through ``numpy.random.default_rng`` (PCG64) seeded
explicitly, so every operation here is a pure function of its inputs and
seed.  ``Dataset`` values are immutable after construction and safe to
share across concurrent tasks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

# Columns whose train-set standard deviation is below this (relative to the
# column mean) are treated as constant and passed through unchanged.
_ZERO_VARIANCE_RTOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """A feature matrix with one label in {-1, +1} per row."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        labs = np.ascontiguousarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {feats.shape}")
        if labs.ndim != 1 or labs.shape[0] != feats.shape[0]:
            raise DataError(
                f"labels length {labs.shape} does not match {feats.shape[0]} feature rows"
            )
        if feats.shape[0] < 2 or feats.shape[1] < 1:
            raise DataError(f"need at least 2 samples and 1 feature, got {feats.shape}")
        if not np.all(np.isin(labs, (-1, 1))):
            bad = sorted(set(labs.tolist()) - {-1, 1})
            raise DataError(f"labels must be -1 or +1, found {bad}")
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        """(negatives, positives)."""
        pos = int(np.count_nonzero(self.labels == 1))
        return self.n_samples - pos, pos

    def subset(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.labels[idx])


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters of the two-Gaussian synthetic generator."""

    n_samples: int
    dim: int
    sep: float
    seed: int

    def __post_init__(self) -> None:
        if self.n_samples < 2 or self.n_samples % 2 != 0:
            raise DataError(f"n_samples must be even and >= 2, got {self.n_samples}")
        if not 1 <= self.dim <= 64:
            raise DataError(f"dim must be in [1, 64], got {self.dim}")
        if self.sep < 0:
            raise DataError(f"sep must be nonnegative, got {self.sep}")
        if not 0 <= self.seed < 2**64:
            raise DataError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class FoldAssignment:
    """A disjoint, covering assignment of sample indices to k folds."""

    k: int
    indices: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self) -> None:
        folds = tuple(np.asarray(f, dtype=np.intp) for f in self.indices)
        if self.k != len(folds) or self.k < 2:
            raise DataError(f"expected k >= 2 fold index lists, got k={self.k}, {len(folds)} lists")
        merged = np.concatenate(folds)
        total = merged.size
        if np.unique(merged).size != total or merged.min() != 0 or merged.max() != total - 1:
            raise DataError("folds must be disjoint and cover indices 0..N-1 exactly")
        object.__setattr__(self, "indices", folds)

    def split(self, ds: Dataset, fold: int) -> tuple[Dataset, Dataset]:
        """(train, test) for one fold, test being that fold's samples."""
        test_idx = self.indices[fold]
        train_idx = np.concatenate([f for i, f in enumerate(self.indices) if i != fold])
        return ds.subset(np.sort(train_idx)), ds.subset(test_idx)


def generate_synthetic(config: SyntheticConfig) -> Dataset:
    """Draw a balanced two-class dataset from mirrored isotropic Gaussians.

    Class +1 is a unit-variance Gaussian centered at ``+sep * u`` and class
    -1 at ``-sep * u``, where ``u`` has every coordinate ``1/sqrt(dim)``.
    The centers are therefore ``2 * sep`` apart in every dimension count,
    which gives ``sep`` a dimension-independent geometric meaning.  Rows
    are shuffled; the whole draw is a pure function of ``config``.
    """
    rng = np.random.default_rng(config.seed)
    half = config.n_samples // 2
    center = np.full(config.dim, config.sep / math.sqrt(config.dim))
    pos = rng.standard_normal((half, config.dim)) + center
    neg = rng.standard_normal((half, config.dim)) - center
    features = np.vstack([pos, neg])
    labels = np.concatenate([np.ones(half, dtype=np.int64), -np.ones(half, dtype=np.int64)])
    order = rng.permutation(config.n_samples)
    return Dataset(features[order], labels[order])


def load_csv(
    path: str | Path,
    label_column: str,
    positive_label: str,
    *,
    keep_labels: Iterable[str] | None = None,
    threshold: float | None = None,
    drop_incomplete: bool = False,
) -> Dataset:
    """Read a headered, comma-delimited CSV into a Dataset.

    Rows whose label equals ``positive_label`` map to +1 and all others to
    -1.  Two preprocessing hooks cover the multi-class sources we ingest:
    ``keep_labels`` drops rows whose raw label is not listed (iris reduced
    to its two non-separable species), and ``threshold`` switches to
    numeric binarization, mapping label values strictly greater than the
    threshold to +1 (wine quality split at 5).  ``drop_incomplete`` skips
    rows with non-numeric feature cells instead of failing, for sources
    with missing-value markers.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: missing label column {label_column!r} (header: {header})")
        label_idx = header.index(label_column)
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        keep = set(keep_labels) if keep_labels is not None else None

        rows: list[list[float]] = []
        labels: list[int] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}")
            raw_label = row[label_idx].strip()
            if keep is not None and raw_label not in keep:
                continue
            try:
                values = [float(row[i]) for i in feature_idx]
            except ValueError:
                if drop_incomplete:
                    continue
                raise DataError(
                    f"{path}:{line_no}: non-numeric feature cell in row {row!r}"
                ) from None
            if not all(math.isfinite(v) for v in values):
                if drop_incomplete:
                    continue
                raise DataError(f"{path}:{line_no}: non-finite feature value in row {row!r}")
            if threshold is not None:
                try:
                    labels.append(1 if float(raw_label) > threshold else -1)
                except ValueError:
                    raise DataError(f"{path}:{line_no}: non-numeric label {raw_label!r}") from None
            else:
                labels.append(1 if raw_label == positive_label else -1)
            rows.append(values)

    if len(set(labels)) < 2:
        raise DataError(f"{path}: fewer than two distinct labels after mapping")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64))


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write a Dataset as CSV with columns f0..f{n-1} and a final ``label``.

    Floats are written with shortest round-trip precision, so
    ``load_csv(path, "label", "1")`` reproduces the Dataset exactly.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(ds.dim)] + ["label"])
        for x, y in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in x] + [str(int(y))])


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_train_test(
    ds: Dataset,
    test_fraction: float,
    stratified: bool = True,
    seed: int = 0,
) -> tuple[Dataset, Dataset]:
    """Deterministic train/test partition.

    Test size is ``round(test_fraction * N)`` (half-up), applied per class
    when stratified, so both the total and the per-class proportions land
    within one sample of the request.  Raises if any class would end up
    empty on either side.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_parts: list[np.ndarray] = []
    train_parts: list[np.ndarray] = []
    if stratified:
        for cls in (-1, 1):
            idx = np.flatnonzero(ds.labels == cls)
            n_test = _round_half_up(test_fraction * idx.size)
            if n_test == 0 or n_test == idx.size:
                raise DataError(
                    f"degenerate split: class {cls} has {idx.size} samples, "
                    f"fraction {test_fraction} leaves one side empty"
                )
            shuffled = rng.permutation(idx)
            test_parts.append(shuffled[:n_test])
            train_parts.append(shuffled[n_test:])
    else:
        n_test = _round_half_up(test_fraction * ds.n_samples)
        if n_test == 0 or n_test == ds.n_samples:
            raise DataError(f"degenerate split for N={ds.n_samples}, fraction={test_fraction}")
        shuffled = rng.permutation(ds.n_samples)
        test_parts.append(shuffled[:n_test])
        train_parts.append(shuffled[n_test:])
    # Reshuffle so stratified outputs are not grouped by class.
    test_idx = rng.permutation(np.concatenate(test_parts))
    train_idx = rng.permutation(np.concatenate(train_parts))
    return ds.subset(train_idx), ds.subset(test_idx)


def stratified_kfold(ds: Dataset, k: int, seed: int = 0) -> FoldAssignment:
    """Partition sample indices into k folds with per-class balance.

    Each class's samples are shuffled and dealt into chunks whose sizes
    differ by at most one, so every fold's class proportions match the
    full dataset within one sample per class.
    """
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    folds: list[list[np.ndarray]] = [[] for _ in range(k)]
    for cls in (-1, 1):
        idx = np.flatnonzero(ds.labels == cls)
        if idx.size < k:
            raise DataError(f"class {cls} has {idx.size} samples, fewer than k={k}")
        shuffled = rng.permutation(idx)
        base, extra = divmod(idx.size, k)
        start = 0
        for f in range(k):
            size = base + (1 if f < extra else 0)
            folds[f].append(shuffled[start : start + size])
            start += size
    return FoldAssignment(k, tuple(np.sort(np.concatenate(parts)) for parts in folds))


def standardize(train: Dataset, others: Sequence[Dataset] = ()) -> tuple[Dataset, list[Dataset]]:
    """Z-score every feature column using the train set's mean and stddev.

    The identical affine map is applied to each dataset in ``others``;
    zero-variance columns pass through unchanged.  Passing ``train`` again
    inside ``others`` reproduces the standardized train set bit-exactly.
    """
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    constant = std <= _ZERO_VARIANCE_RTOL * np.maximum(1.0, np.abs(mean))
    shift = np.where(constant, 0.0, mean)
    scale = np.where(constant, 1.0, std)

    def apply(ds: Dataset) -> Dataset:
        return Dataset((ds.features - shift) / scale, ds.labels)

    return apply(train), [apply(ds) for ds in others]
