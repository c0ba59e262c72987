"""External validity measures: Adjusted Rand Index and micro-cluster purity."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .model import Contingency

# Predicted id for samples that no macro-cluster (or no cluster) covers.
NOISE_CLASS = -1


def _comb2(x: int) -> int:
    return x * (x - 1) // 2


def build_contingency(truth, pred) -> Contingency:
    truth, pred = list(truth), list(pred)
    if len(truth) != len(pred):
        raise ValueError(f"length mismatch: {len(truth)} truth labels vs {len(pred)} predictions")
    if not truth:
        raise ValueError("need at least one sample")
    classes = sorted(set(truth), key=_sort_key)
    clusters = sorted(set(pred), key=_sort_key)
    row = {c: i for i, c in enumerate(classes)}
    col = {c: j for j, c in enumerate(clusters)}
    counts = np.zeros((len(classes), len(clusters)), dtype=np.int64)
    for t, p in zip(truth, pred):
        counts[row[t], col[p]] += 1
    return Contingency(classes, clusters, counts, counts.sum(axis=1), counts.sum(axis=0),
                       int(counts.sum()))


def _sort_key(v):
    # mixed int/str labels must still sort deterministically
    return (type(v).__name__, v)


def ari(c: Contingency) -> float:
    """Adjusted Rand Index from a contingency table, exact up to the last division.

    Returns 1.0 when the chance-corrected denominator vanishes, which only
    happens when both partitions put every pair the same way.
    """
    n = int(c.total)
    if n < 2:
        raise ValueError("ARI needs at least two samples")
    sum_ij = sum(_comb2(int(v)) for v in c.counts.ravel() if v > 1)
    sum_a = sum(_comb2(int(v)) for v in c.row_sums)
    sum_b = sum(_comb2(int(v)) for v in c.col_sums)
    pairs = _comb2(n)
    # both terms scaled by 2 * C(n, 2) to stay in integers
    num = 2 * (sum_ij * pairs - sum_a * sum_b)
    den = (sum_a + sum_b) * pairs - 2 * sum_a * sum_b
    if den == 0:
        return 1.0
    return num / den


def purity(c: Contingency) -> float:
    """Unweighted mean over non-empty clusters of the dominant-class fraction."""
    sizes = c.col_sums
    nonempty = [j for j in range(len(sizes)) if sizes[j] > 0]
    if not nonempty:
        raise ValueError("purity needs at least one non-empty cluster")
    total = sum(Fraction(int(c.counts[:, j].max()), int(sizes[j])) for j in nonempty)
    return float(total / len(nonempty))


def ari_score(truth, pred) -> float:
    return ari(build_contingency(truth, pred))


def purity_score(truth, pred) -> float:
    return purity(build_contingency(truth, pred))
