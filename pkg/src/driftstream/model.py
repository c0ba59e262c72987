"""Domain types shared by the engine, metrics and evaluation code."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Optional, Union

import numpy as np


class StreamError(ValueError):
    """A sample was rejected by the engine (bad order, bad dimension, non-finite)."""


class ContractViolation(AssertionError):
    """An operation was called with its precondition violated."""


@dataclass
class Sample:
    """One timestamped feature vector.

    ``label`` is ground truth for evaluation only; the engine never reads it.
    """

    features: np.ndarray
    timestamp: int
    label: Optional[Hashable] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 1 or self.features.size < 1:
            raise ValueError("features must be a non-empty 1-D vector")

    @property
    def dim(self) -> int:
        return self.features.shape[0]


@dataclass(eq=False)
class MicroCluster:
    id: int
    center: np.ndarray
    radius: float
    kernel_radius: float
    density: int = 1
    kernel_count: int = 1
    last_update: int = 0
    edges: set = field(default_factory=set)
    label: int = 0

    @property
    def is_macro(self) -> bool:
        return self.label > 0


@dataclass(frozen=True)
class Adaptive:
    """Per-window radius from the median pairwise distance of the buffer."""

    window: int


@dataclass(frozen=True)
class Fixed:
    """One radius for every cluster, samples processed one at a time."""

    r: float


RadiusPolicy = Union[Adaptive, Fixed]


@dataclass(frozen=True)
class EngineConfig:
    radius_policy: RadiusPolicy
    d: int = 5
    k: float = 2.0
    t_max: int = 10_000
    r_min: float = 1e-9
    pair_cap: int = 4096
    seed: int = 0

    def __post_init__(self):
        pol = self.radius_policy
        if isinstance(pol, Adaptive):
            if pol.window < 1:
                raise ValueError(f"window must be >= 1 tick, got {pol.window}")
        elif isinstance(pol, Fixed):
            if not pol.r > 0:
                raise ValueError(f"fixed radius must be > 0, got {pol.r}")
        else:
            raise TypeError(f"unknown radius policy {pol!r}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if not self.k > 1:
            raise ValueError(f"k must be > 1 so the kernel is inside the cluster, got {self.k}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if not self.r_min > 0:
            raise ValueError(f"r_min must be > 0, got {self.r_min}")
        if self.pair_cap < 2:
            raise ValueError("pair_cap must be >= 2")

    @classmethod
    def adaptive(cls, t_w: int, d: int = 5, k: float = 2.0, **kw) -> "EngineConfig":
        return cls(Adaptive(int(t_w)), d=int(d), k=float(k), **kw)

    @classmethod
    def fixed(cls, r: float, d: int = 5, k: float = 2.0, **kw) -> "EngineConfig":
        return cls(Fixed(float(r)), d=int(d), k=float(k), **kw)

    @property
    def mode(self) -> str:
        return "adaptive" if isinstance(self.radius_policy, Adaptive) else "fixed"

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "d": self.d, "k": self.k, "t_max": self.t_max,
               "r_min": self.r_min, "pair_cap": self.pair_cap, "seed": self.seed}
        if isinstance(self.radius_policy, Adaptive):
            out["t_w"] = self.radius_policy.window
        else:
            out["r"] = self.radius_policy.r
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        data = dict(data)
        mode = data.pop("mode", "adaptive")
        if mode == "adaptive":
            pol = Adaptive(int(data.pop("t_w")))
            data.pop("r", None)
        elif mode == "fixed":
            pol = Fixed(float(data.pop("r")))
            data.pop("t_w", None)
        else:
            raise ValueError(f"mode must be 'adaptive' or 'fixed', got {mode!r}")
        known = {"d", "k", "t_max", "r_min", "pair_cap", "seed"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown engine config keys: {sorted(extra)}")
        for key in ("d", "t_max", "pair_cap", "seed"):
            if key in data:
                data[key] = int(data[key])
        for key in ("k", "r_min"):
            if key in data:
                data[key] = float(data[key])
        return cls(pol, **data)


class _CenterIndex:
    """Row-aligned arrays of live cluster geometry, kept in id order.

    Rows are appended on creation (ids are increasing) and compacted on
    removal, so ``argmin`` over rows breaks ties towards the lowest id.
    """

    def __init__(self, dim: int, capacity: int = 16):
        self.dim = dim
        self.n = 0
        self.ids = np.empty(capacity, dtype=np.int64)
        self.centers = np.empty((capacity, dim))
        self.radii = np.empty(capacity)
        self.kernel_radii = np.empty(capacity)
        self.last_update = np.empty(capacity, dtype=np.int64)
        self.row_of: dict[int, int] = {}

    def _grow(self):
        cap = 2 * len(self.ids)
        ids = np.empty(cap, dtype=np.int64)
        ids[: self.n] = self.ids[: self.n]
        centers = np.empty((cap, self.dim))
        centers[: self.n] = self.centers[: self.n]
        radii = np.empty(cap)
        radii[: self.n] = self.radii[: self.n]
        kr = np.empty(cap)
        kr[: self.n] = self.kernel_radii[: self.n]
        lu = np.empty(cap, dtype=np.int64)
        lu[: self.n] = self.last_update[: self.n]
        self.ids, self.centers, self.radii, self.kernel_radii = ids, centers, radii, kr
        self.last_update = lu

    def append(self, mc: MicroCluster):
        if self.n and mc.id <= self.ids[self.n - 1]:
            raise ContractViolation("cluster ids must be appended in increasing order")
        if self.n == len(self.ids):
            self._grow()
        i = self.n
        self.ids[i] = mc.id
        self.centers[i] = mc.center
        self.radii[i] = mc.radius
        self.kernel_radii[i] = mc.kernel_radius
        self.last_update[i] = mc.last_update
        self.row_of[mc.id] = i
        self.n += 1

    def set_center(self, cid: int, center: np.ndarray):
        self.centers[self.row_of[cid]] = center

    def remove(self, cids):
        drop = np.fromiter((self.row_of[c] for c in cids), dtype=np.int64)
        keep = np.ones(self.n, dtype=bool)
        keep[drop] = False
        m = int(keep.sum())
        self.ids[:m] = self.ids[: self.n][keep]
        self.centers[:m] = self.centers[: self.n][keep]
        self.radii[:m] = self.radii[: self.n][keep]
        self.kernel_radii[:m] = self.kernel_radii[: self.n][keep]
        self.last_update[:m] = self.last_update[: self.n][keep]
        self.n = m
        self.row_of = {int(c): i for i, c in enumerate(self.ids[:m])}

    def distances(self, x: np.ndarray) -> np.ndarray:
        diff = self.centers[: self.n] - x
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))


@dataclass(eq=False)
class ClusterModel:
    """Live micro-clusters plus the undirected intersection graph."""

    clusters: dict = field(default_factory=dict)
    next_label: int = 1
    next_id: int = 0
    previous_radius: Optional[float] = None
    clock: int = 0
    dim: Optional[int] = None
    _index: Optional[_CenterIndex] = field(default=None, repr=False)

    def __len__(self):
        return len(self.clusters)

    def add(self, mc: MicroCluster):
        if self.dim is None:
            self.dim = mc.center.shape[0]
        if self._index is None:
            self._index = _CenterIndex(self.dim)
        self.clusters[mc.id] = mc
        self._index.append(mc)

    def new_id(self) -> int:
        cid = self.next_id
        self.next_id += 1
        return cid

    def move_center(self, mc: MicroCluster, center: np.ndarray):
        mc.center = center
        self._index.set_center(mc.id, center)

    def touch(self, mc: MicroCluster, timestamp: int):
        mc.last_update = timestamp
        self._index.last_update[self._index.row_of[mc.id]] = timestamp

    def remove(self, cids):
        cids = list(cids)
        if not cids:
            return
        for cid in cids:
            mc = self.clusters.pop(cid)
            for other in mc.edges:
                if other in self.clusters:
                    self.clusters[other].edges.discard(cid)
            mc.edges.clear()
        self._index.remove(cids)

    def link(self, a: int, b: int):
        self.clusters[a].edges.add(b)
        self.clusters[b].edges.add(a)

    def index(self) -> Optional[_CenterIndex]:
        if not self.clusters:
            return None
        return self._index

    def macro_labels(self) -> set:
        return {c.label for c in self.clusters.values() if c.label > 0}

    def components(self, ids=None) -> list[list[int]]:
        """Connected components of the edge graph, each sorted, ordered by min id."""
        pool = set(self.clusters) if ids is None else set(ids)
        seen: set = set()
        out = []
        for start in sorted(pool):
            if start in seen:
                continue
            comp = []
            stack = [start]
            seen.add(start)
            while stack:
                cur = stack.pop()
                comp.append(cur)
                for nb in self.clusters[cur].edges:
                    if nb in pool and nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            out.append(sorted(comp))
        return out


@dataclass
class Contingency:
    """Class x cluster count table with its marginals."""

    classes: list
    clusters: list
    counts: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    total: int


def validate_model(model: ClusterModel, cfg: EngineConfig) -> list[str]:
    """Report every broken invariant of ``model``; never raises."""
    problems = []
    cl = model.clusters
    for cid, mc in cl.items():
        if mc.id != cid:
            problems.append(f"cluster {cid} stored under wrong id {mc.id}")
        if cid >= model.next_id:
            problems.append(f"cluster id {cid} not below next_id {model.next_id}")
        if mc.kernel_radius != mc.radius / cfg.k:
            problems.append(f"cluster {cid}: kernel_radius != radius / k")
        if not (0 < mc.kernel_radius < mc.radius):
            problems.append(f"cluster {cid}: kernel radius not inside (0, radius)")
        if mc.density < 1:
            problems.append(f"cluster {cid}: density < 1")
        if not (0 <= mc.kernel_count <= mc.density):
            problems.append(f"cluster {cid}: kernel_count outside [0, density]")
        if mc.label < 0:
            problems.append(f"cluster {cid}: negative label")
        if mc.label > 0 and mc.density < cfg.d:
            problems.append(f"cluster {cid}: macro label with density below d")
        if mc.label >= model.next_label:
            problems.append(f"cluster {cid}: label {mc.label} not below next_label")
        if cid in mc.edges:
            problems.append(f"cluster {cid}: self edge")
        if model.dim is not None and mc.center.shape != (model.dim,):
            problems.append(f"cluster {cid}: center dimension mismatch")
        if not np.all(np.isfinite(mc.center)):
            problems.append(f"cluster {cid}: non-finite center")
        if mc.last_update > model.clock:
            problems.append(f"cluster {cid}: last_update ahead of clock")
        for other in sorted(mc.edges):
            if other not in cl:
                problems.append(f"edge ({cid},{other}) to missing cluster")
            elif cid not in cl[other].edges:
                problems.append(f"asymmetric edge ({cid},{other})")

    if any(p.startswith(("asymmetric", "edge (")) for p in problems):
        return problems

    seen_labels: dict[int, int] = {}
    for comp in model.components():
        labels = {cl[c].label for c in comp}
        if len(comp) > 1 and (len(labels) != 1 or 0 in labels):
            problems.append("component label mismatch")
            continue
        lab = labels.pop()
        if lab == 0:
            continue
        if lab in seen_labels:
            problems.append(f"label {lab} shared by distinct components")
        seen_labels[lab] = comp[0]

    idx = model._index
    if cl and idx is not None:
        if idx.n != len(cl) or list(idx.ids[: idx.n]) != list(cl):
            problems.append("center index out of sync with clusters")
        else:
            for i, (cid, mc) in enumerate(cl.items()):
                if (not np.array_equal(idx.centers[i], mc.center) or idx.radii[i] != mc.radius
                        or idx.kernel_radii[i] != mc.kernel_radius
                        or idx.last_update[i] != mc.last_update):
                    problems.append(f"center index stale for cluster {cid}")
    if model.previous_radius is not None and not (
            model.previous_radius > 0 and math.isfinite(model.previous_radius)):
        problems.append("previous_radius not a positive real")
    return problems
