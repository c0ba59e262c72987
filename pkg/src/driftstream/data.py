"""Synthetic generators, stream ordering, CSV I/O and missing-value imputation."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model import Sample

log = logging.getLogger(__name__)


class DataError(ValueError):
    """Malformed dataset file or unusable data."""


@dataclass
class BlobSpec:
    """Isotropic Gaussian blobs: one center, std and count per blob."""

    centers: np.ndarray
    stds: Sequence[float]
    counts: Sequence[int]
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        k, dim = self.centers.shape
        if dim < 1:
            raise ValueError("blob dimension must be >= 1")
        if len(self.stds) != k or len(self.counts) != k:
            raise ValueError("need one std and one count per blob center")
        if any(c < 1 for c in self.counts):
            raise ValueError("blob counts must be >= 1")
        if any(s < 0 for s in self.stds):
            raise ValueError("blob stds must be >= 0")

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


def gen_blobs(spec: BlobSpec) -> list[Sample]:
    """Draw labelled samples; label = blob index, timestamps 0..n-1 in output order."""
    rng = np.random.default_rng(spec.seed)
    parts, labels = [], []
    for i, (center, std, count) in enumerate(zip(spec.centers, spec.stds, spec.counts)):
        parts.append(center + std * rng.standard_normal((count, spec.dim)))
        labels.append(np.full(count, i))
    X = np.concatenate(parts)
    y = np.concatenate(labels)
    if spec.shuffle:
        perm = rng.permutation(len(y))
        X, y = X[perm], y[perm]
    return [Sample(X[t], t, int(y[t])) for t in range(len(y))]


def random_blob_spec(n_blobs: int, dims: int, n: int, seed: int = 0, std: float = 1.0,
                     center_box=(-10.0, 10.0)) -> BlobSpec:
    """Blob centers drawn uniformly in a box, samples split as evenly as possible."""
    if dims < 1:
        raise ValueError("dims must be >= 1")
    if n_blobs < 1 or n < n_blobs:
        raise ValueError("need n >= n_blobs >= 1")
    rng = np.random.default_rng([seed, 1])
    centers = rng.uniform(center_box[0], center_box[1], size=(n_blobs, dims))
    counts = [n // n_blobs + (1 if i < n % n_blobs else 0) for i in range(n_blobs)]
    return BlobSpec(centers, [std] * n_blobs, counts, seed=seed)


# Raw-space layout of the three-group toy problem before scaling to [0, 1]^2.
TOY_CENTERS = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 5.0]])
TOY_STDS = (0.2, 0.2, 0.8)


def toy_dataset(seed: int = 0, per_cluster: int = 333) -> list[Sample]:
    """Groups A, B (std 0.2) and the sparse C (std 0.8), min-max scaled to the
    unit square and sorted by label so that each group arrives contiguously."""
    spec = BlobSpec(TOY_CENTERS, TOY_STDS, [per_cluster] * 3, seed=seed)
    samples = gen_blobs(spec)
    X = minmax_scale(np.stack([s.features for s in samples]))
    return order_by_label([Sample(X[i], s.timestamp, s.label) for i, s in enumerate(samples)])


def minmax_scale(X: np.ndarray) -> np.ndarray:
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (X - lo) / span


def order_by_label(samples) -> list[Sample]:
    """Stable sort by label; timestamps reassigned 0..n-1."""
    samples = list(samples)
    if any(s.label is None for s in samples):
        raise ValueError("order_by_label needs labelled samples")
    order = sorted(range(len(samples)), key=lambda i: (_label_key(samples[i].label), i))
    return [Sample(samples[i].features, t, samples[i].label) for t, i in enumerate(order)]


def _label_key(v):
    return (type(v).__name__, v)


def to_matrix(samples) -> np.ndarray:
    return np.stack([s.features for s in samples])


def _parse_label(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def load_csv(path, label_column: Optional[str] = "label",
             timestamp_column: Optional[str] = None) -> list[Sample]:
    """Read a header-first CSV; every non-label, non-timestamp column is a feature.

    Empty feature cells become NaN (missing). Without a timestamp column the
    row index is the tick.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column is not None and label_column not in header:
            raise DataError(f"{path}:1: label column {label_column!r} not in header {header}")
        if timestamp_column is not None and timestamp_column not in header:
            raise DataError(f"{path}:1: timestamp column {timestamp_column!r} not in header")
        li = header.index(label_column) if label_column is not None else None
        ti = header.index(timestamp_column) if timestamp_column is not None else None
        fcols = [i for i in range(len(header)) if i not in (li, ti)]
        if not fcols:
            raise DataError(f"{path}:1: no feature columns")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            feats = np.empty(len(fcols))
            for k, i in enumerate(fcols):
                cell = row[i].strip()
                if cell == "":
                    feats[k] = np.nan
                    continue
                try:
                    feats[k] = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric value {cell!r} in column {header[i]!r}"
                    ) from None
                if not math.isfinite(feats[k]):
                    raise DataError(f"{path}:{lineno}: non-finite value in column {header[i]!r}")
            if ti is not None:
                try:
                    tick = int(row[ti])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad timestamp {row[ti]!r}") from None
            else:
                tick = len(out)
            label = _parse_label(row[li].strip()) if li is not None else None
            out.append(Sample(feats, tick, label))
    return out


def save_csv(samples, path, label_column: str = "label",
             timestamp_column: Optional[str] = None, feature_names=None) -> int:
    samples = list(samples)
    if not samples:
        raise DataError("nothing to write")
    dim = samples[0].dim
    names = list(feature_names) if feature_names else [f"x{i}" for i in range(dim)]
    header = names + [label_column] + ([timestamp_column] if timestamp_column else [])
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for s in samples:
            cells = ["" if math.isnan(v) else repr(float(v)) for v in s.features]
            cells.append("" if s.label is None else str(s.label))
            if timestamp_column:
                cells.append(str(s.timestamp))
            w.writerow(cells)
    return len(samples)


def impute_matrix(X: np.ndarray, max_iter: int = 10, tol: float = 1e-3) -> np.ndarray:
    """Round-robin least-squares imputation of NaN cells.

    Missing cells start at their column mean; each sweep regresses every
    incomplete column on all the others (with intercept) over the rows where
    it is observed and re-predicts its missing cells.
    """
    X = np.array(X, dtype=float)
    if np.isinf(X).any():
        raise DataError("impute: infinite values in input")
    missing = np.isnan(X)
    if not missing.any():
        return X
    n, p = X.shape
    empty = missing.all(axis=0)
    if empty.any():
        log.warning("impute: columns %s are entirely missing, filling with 0",
                    np.flatnonzero(empty).tolist())
        X[:, empty] = 0.0
        missing[:, empty] = False
    means = np.nanmean(np.where(missing, np.nan, X), axis=0)
    X[missing] = np.take(means, np.nonzero(missing)[1])
    todo = [j for j in range(p) if missing[:, j].any()]
    for _ in range(max_iter):
        delta = 0.0
        for j in todo:
            obs = ~missing[:, j]
            others = np.delete(X, j, axis=1)
            A = np.column_stack([np.ones(n), others])
            coef, *_ = np.linalg.lstsq(A[obs], X[obs, j], rcond=None)
            new = A[~obs] @ coef
            delta = max(delta, float(np.max(np.abs(new - X[~obs, j]))))
            X[~obs, j] = new
        if delta < tol:
            break
    return X


def impute(samples, max_iter: int = 10, tol: float = 1e-3) -> list[Sample]:
    samples = list(samples)
    X = impute_matrix(to_matrix(samples), max_iter=max_iter, tol=tol)
    return [Sample(X[i], s.timestamp, s.label) for i, s in enumerate(samples)]
