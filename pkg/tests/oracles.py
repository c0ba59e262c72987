"""Independent reference computations used to freeze expected values.

None of these touch the package's own code paths: ARI and purity are
evaluated from raw label lists by pair enumeration and direct counting,
medians by sorting, the intersection test by sampling points, and the
fixed-radius reference keeps clusters as plain dicts.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def ari_by_pairs(truth, pred):
    """Adjusted Rand Index with every binomial sum obtained by enumerating sample pairs."""
    n = len(truth)
    same_both = same_class = same_cluster = 0
    for i, j in itertools.combinations(range(n), 2):
        sc = truth[i] == truth[j]
        sk = pred[i] == pred[j]
        same_class += sc
        same_cluster += sk
        same_both += sc and sk
    total = Fraction(n * (n - 1), 2)
    expected = Fraction(same_class * same_cluster) / total
    maximum = Fraction(same_class + same_cluster, 2)
    if maximum == expected:
        return 1.0
    return float((same_both - expected) / (maximum - expected))


def purity_by_counting(truth, pred):
    """Purity: mean over predicted clusters of dominant-class share."""
    members = {}
    for t, p in zip(truth, pred):
        members.setdefault(p, []).append(t)
    ratios = []
    for labels in members.values():
        dominant = max(labels.count(c) for c in set(labels))
        ratios.append(Fraction(dominant, len(labels)))
    return float(sum(ratios) / len(ratios))


def median_pairwise(points):
    d = sorted(math.dist(a, b) for a, b in itertools.combinations(points, 2))
    m = len(d)
    return d[m // 2] if m % 2 else (d[m // 2 - 1] + d[m // 2]) / 2


def kernel_meets_shell_by_sampling(ca, kra, cb, rb, krb, n=20001):
    """Scan points of a's kernel ball along the line through both centers.

    Distances from b's center to points of a ball take every value between
    the nearest and farthest point, and both extremes lie on that line, so a
    dense scan of the diameter finds a point in the shell when one exists.
    """
    ca, cb = np.asarray(ca, float), np.asarray(cb, float)
    u = cb - ca
    norm = np.linalg.norm(u)
    u = u / norm if norm > 0 else np.eye(len(ca))[0]
    ts = np.linspace(-kra, kra, n)
    pts = ca + ts[:, None] * u
    dist = np.linalg.norm(pts - cb, axis=1)
    return bool(np.any((dist >= krb) & (dist <= rb)))


def fixed_radius_reference(points, r):
    """Per-sample assign-or-create with one radius and kernel r/2.

    Returns, per sample, the index of the cluster it joined (creations get a
    fresh index). The center moves to the running mean of kernel hits.
    """
    clusters = []
    decisions = []
    for p in points:
        p = np.asarray(p, float)
        best, best_d = None, None
        for idx, c in enumerate(clusters):
            d = float(np.sqrt(np.sum((c["center"] - p) ** 2)))
            if best_d is None or d < best_d:
                best, best_d = idx, d
        if best is not None and best_d <= r:
            c = clusters[best]
            if best_d <= r / 2:
                c["kernel"].append(p)
                c["center"] = np.mean(c["kernel"], axis=0)
            decisions.append(best)
        else:
            clusters.append({"center": p.copy(), "kernel": [p.copy()]})
            decisions.append(len(clusters) - 1)
    return decisions
