"""Online micro-cluster engine with time-window adaptive radii.

Adaptive mode buffers samples for ``t_w`` ticks, sets the radius of any
cluster created from that buffer to the median pairwise distance of the
buffered samples, then assigns or creates sample by sample. Fixed mode uses
one radius and processes each sample on arrival, which is the fixed-radius
baseline behaviour.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from .model import (
    Adaptive,
    ClusterModel,
    ContractViolation,
    EngineConfig,
    Fixed,
    MicroCluster,
    Sample,
    StreamError,
)

CREATED = "ClusterCreated"
PROMOTED = "ClusterPromoted"
LINKED = "ClustersLinked"
KILLED = "ClusterKilled"
RELABELED = "ComponentRelabeled"

SNAPSHOT_FORMAT = "driftstream.snapshot/1"


@dataclass(frozen=True)
class Event:
    kind: str
    clock: int
    cluster: int
    label: Optional[int] = None
    other: Optional[int] = None


def _distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    return float(np.sqrt(np.dot(diff, diff)))


def compute_radius(buffer, previous_radius=None, r_min=1e-9, pair_cap=4096, rng=None) -> float:
    """Median pairwise Euclidean distance of the buffered samples.

    Falls back to ``previous_radius`` (or ``r_min``) when the buffer holds a
    single sample or the median is below ``r_min``. Buffers larger than
    ``pair_cap`` are estimated from a uniform sample of pairs.
    """
    if len(buffer) == 0:
        raise ContractViolation("compute_radius needs a non-empty buffer")
    fallback = previous_radius if previous_radius is not None else r_min
    if len(buffer) < 2:
        return fallback
    X = np.stack([s.features if isinstance(s, Sample) else np.asarray(s, dtype=float)
                  for s in buffer])
    n = X.shape[0]
    if n <= pair_cap:
        med = float(np.median(pdist(X)))
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        m = pair_cap * (pair_cap - 1) // 2
        i = rng.integers(0, n, size=m)
        j = rng.integers(0, n - 1, size=m)
        j = j + (j >= i)  # uniform over ordered pairs with i != j
        med = float(np.median(np.sqrt(((X[i] - X[j]) ** 2).sum(axis=1))))
    if med < r_min:
        return fallback
    return med


def create_micro(model: ClusterModel, s: Sample, r: float, cfg: EngineConfig) -> MicroCluster:
    if not r >= cfg.r_min:
        raise ContractViolation(f"radius {r} below r_min {cfg.r_min}")
    mc = MicroCluster(
        id=model.new_id(),
        center=np.array(s.features, dtype=float),
        radius=float(r),
        kernel_radius=float(r) / cfg.k,
        density=1,
        kernel_count=1,
        last_update=s.timestamp,
    )
    model.add(mc)
    return mc


def macro_intersects(a: MicroCluster, b: MicroCluster) -> bool:
    """True iff the kernel ball of one cluster meets the shell annulus of the other."""
    dist = _distance(a.center, b.center)
    return _kernel_meets_shell(dist, a.kernel_radius, b.radius, b.kernel_radius) or \
        _kernel_meets_shell(dist, b.kernel_radius, a.radius, a.kernel_radius)


def _kernel_meets_shell(dist, kr_a, r_b, kr_b):
    return (dist <= kr_a + r_b) & (dist + kr_a >= kr_b)


def _intersecting_macros(model: ClusterModel, mc: MicroCluster) -> list[int]:
    idx = model.index()
    labels = np.fromiter((c.label for c in model.clusters.values()), dtype=np.int64,
                         count=len(model.clusters))
    cand = (labels > 0) & (idx.ids[: idx.n] != mc.id)
    if not cand.any():
        return []
    rows = np.flatnonzero(cand)
    diff = idx.centers[rows] - mc.center
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    kr, r = idx.kernel_radii[rows], idx.radii[rows]
    hit = _kernel_meets_shell(dist, mc.kernel_radius, r, kr) | \
        _kernel_meets_shell(dist, kr, mc.radius, mc.kernel_radius)
    return [int(c) for c in idx.ids[rows[hit]]]


def _spread_label(model: ClusterModel, start: int, label: int, clock: int) -> list[Event]:
    """Give ``label`` to every cluster in the component of ``start``."""
    replaced: dict[int, int] = {}
    for cid in _reachable(model, start):
        mc = model.clusters[cid]
        if mc.label != label:
            replaced.setdefault(mc.label, cid)
            mc.label = label
    return [Event(RELABELED, clock, start, label, old) for old in sorted(replaced)]


def _reachable(model: ClusterModel, start: int) -> list[int]:
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        for nb in model.clusters[cur].edges:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    seen.discard(start)
    return sorted(seen)


def update_micro(model: ClusterModel, mc: MicroCluster, s: Sample, cfg: EngineConfig,
                 dist: Optional[float] = None) -> list[Event]:
    if dist is None:
        dist = _distance(mc.center, s.features)
    if not dist <= mc.radius:
        raise ContractViolation(f"sample at distance {dist} outside cluster {mc.id} radius {mc.radius}")
    model.touch(mc, s.timestamp)
    mc.density += 1
    if dist <= mc.kernel_radius:
        mc.kernel_count += 1
        model.move_center(mc, mc.center + (s.features - mc.center) / mc.kernel_count)

    events: list[Event] = []
    if mc.density >= cfg.d and mc.label == 0:
        neighbours = _intersecting_macros(model, mc)
        if neighbours:
            label = min(model.clusters[c].label for c in neighbours)
        else:
            label = model.next_label
            model.next_label += 1
        mc.label = label
        events.append(Event(PROMOTED, model.clock, mc.id, label))
        for other in neighbours:
            model.link(mc.id, other)
            events.append(Event(LINKED, model.clock, mc.id, label, other))
        if neighbours:
            events.extend(_spread_label(model, mc.id, label, model.clock))
    return events


def nearest(model: ClusterModel, x: np.ndarray):
    """(cluster, distance) of the closest center, lowest id on ties; None if empty."""
    idx = model.index()
    if idx is None:
        return None
    dist = idx.distances(x)
    row = int(np.argmin(dist))
    return model.clusters[int(idx.ids[row])], float(dist[row])


def _assign_or_create(model: ClusterModel, s: Sample, r: float, cfg: EngineConfig) -> list[Event]:
    hit = nearest(model, s.features)
    if hit is not None and hit[1] <= hit[0].radius:
        return update_micro(model, hit[0], s, cfg, dist=hit[1])
    mc = create_micro(model, s, r, cfg)
    return [Event(CREATED, model.clock, mc.id, None)]


def relabel_components(model: ClusterModel) -> list[Event]:
    """Give every connected component of macro-clusters one distinct label.

    A component keeps its label if it holds the smallest id among the
    components sharing that label; the others draw fresh labels in order of
    their smallest id.
    """
    labelled = [cid for cid, mc in model.clusters.items() if mc.label > 0]
    comps = model.components(labelled)
    by_label: dict[int, list[list[int]]] = {}
    for comp in comps:
        lab = min(model.clusters[c].label for c in comp)
        by_label.setdefault(lab, []).append(comp)
    events = []
    for lab in sorted(by_label):
        for pos, comp in enumerate(by_label[lab]):
            new = lab if pos == 0 else model.next_label
            if pos:
                model.next_label += 1
            changed = False
            for cid in comp:
                mc = model.clusters[cid]
                if mc.label != new:
                    mc.label = new
                    changed = True
            if changed:
                events.append(Event(RELABELED, model.clock, comp[0], new, lab))
    return events


def predict(model: ClusterModel, x) -> Optional[int]:
    """Macro label of the nearest covering cluster, None for noise. Read-only."""
    return assign(model, x)[1]


def assign(model: ClusterModel, x):
    """(cluster id, macro label) of the nearest cluster whose radius covers ``x``.

    Both entries are None when nothing covers ``x``; the label alone is None
    when the covering cluster is not yet a macro-cluster.
    """
    x = x.features if isinstance(x, Sample) else np.asarray(x, dtype=float)
    idx = model.index()
    if idx is None:
        return None, None
    dist = idx.distances(x)
    covered = dist <= idx.radii[: idx.n]
    if not covered.any():
        return None, None
    row = int(np.argmin(np.where(covered, dist, np.inf)))
    mc = model.clusters[int(idx.ids[row])]
    return mc.id, (mc.label if mc.label > 0 else None)


def snapshot(model: ClusterModel) -> dict:
    clusters = []
    for cid in sorted(model.clusters):
        mc = model.clusters[cid]
        clusters.append({
            "id": mc.id,
            "center": [float(v) for v in mc.center],
            "radius": float(mc.radius),
            "kernel_radius": float(mc.kernel_radius),
            "density": int(mc.density),
            "kernel_count": int(mc.kernel_count),
            "last_update": int(mc.last_update),
            "edges": sorted(int(e) for e in mc.edges),
            "label": int(mc.label),
        })
    return {
        "format": SNAPSHOT_FORMAT,
        "clock": int(model.clock),
        "dim": model.dim,
        "next_id": int(model.next_id),
        "next_label": int(model.next_label),
        "previous_radius": None if model.previous_radius is None else float(model.previous_radius),
        "macro_labels": sorted(model.macro_labels()),
        "clusters": clusters,
    }


def dumps(snap: dict) -> str:
    """Byte-stable JSON text of a snapshot."""
    return json.dumps(snap, sort_keys=True, indent=1) + "\n"


def restore(snap: dict) -> ClusterModel:
    if snap.get("format") != SNAPSHOT_FORMAT:
        raise ValueError(f"not a {SNAPSHOT_FORMAT} document")
    model = ClusterModel(next_label=snap["next_label"], next_id=snap["next_id"],
                         previous_radius=snap["previous_radius"], clock=snap["clock"],
                         dim=snap["dim"])
    for c in snap["clusters"]:
        model.add(MicroCluster(
            id=c["id"], center=np.array(c["center"], dtype=float), radius=c["radius"],
            kernel_radius=c["kernel_radius"], density=c["density"],
            kernel_count=c["kernel_count"], last_update=c["last_update"],
            edges=set(c["edges"]), label=c["label"]))
    return model


class Engine:
    """Single-writer clustering state machine."""

    def __init__(self, cfg: EngineConfig, model: Optional[ClusterModel] = None):
        self.cfg = cfg
        self.model = model if model is not None else ClusterModel()
        self.buffer: list[Sample] = []
        self.window_start: Optional[int] = None
        self.flushes = 0

    @property
    def adaptive(self) -> bool:
        return isinstance(self.cfg.radius_policy, Adaptive)

    def _check(self, sample: Sample):
        if sample.timestamp < self.model.clock:
            raise StreamError(
                f"timestamp {sample.timestamp} is before the engine clock {self.model.clock}")
        if sample.timestamp < 0:
            raise StreamError("timestamps must be non-negative")
        if self.model.dim is not None and sample.dim != self.model.dim:
            raise StreamError(f"sample has dimension {sample.dim}, model has {self.model.dim}")
        if not np.all(np.isfinite(sample.features)):
            raise StreamError("sample has non-finite features (impute missing values first)")

    def ingest(self, sample: Sample) -> list[Event]:
        self._check(sample)
        model = self.model
        if model.dim is None:
            model.dim = sample.dim
        model.clock = sample.timestamp
        events: list[Event] = []
        if self.adaptive:
            t_w = self.cfg.radius_policy.window
            if self.window_start is None:
                self.window_start = sample.timestamp
            elif sample.timestamp >= self.window_start + t_w:
                if self.buffer:
                    events += flush_buffer(self)
                events += kill_expired(self)
                self.window_start += t_w * ((sample.timestamp - self.window_start) // t_w)
            self.buffer.append(sample)
        else:
            events += _assign_or_create(model, sample, self.cfg.radius_policy.r, self.cfg)
            events += kill_expired(self)
        return events

    def flush(self) -> list[Event]:
        """Process a partially filled window, e.g. at the end of a finite stream."""
        if not self.buffer:
            return []
        return flush_buffer(self) + kill_expired(self)

    def run(self, stream, final_flush=True) -> list[Event]:
        events = []
        for s in stream:
            events += self.ingest(s)
        if final_flush:
            events += self.flush()
        return events

    def predict(self, x) -> Optional[int]:
        return predict(self.model, x)

    def assign(self, x):
        return assign(self.model, x)

    def snapshot(self) -> dict:
        return snapshot(self.model)


def flush_buffer(engine: Engine) -> list[Event]:
    if not engine.buffer:
        raise ContractViolation("flush_buffer needs a non-empty buffer")
    model, cfg = engine.model, engine.cfg
    rng = np.random.default_rng([cfg.seed, engine.flushes])
    r = compute_radius(engine.buffer, model.previous_radius, cfg.r_min, cfg.pair_cap, rng)
    model.previous_radius = r
    events = []
    for s in engine.buffer:
        events += _assign_or_create(model, s, r, cfg)
    engine.buffer = []
    engine.flushes += 1
    return events


def kill_expired(engine: Engine) -> list[Event]:
    model = engine.model
    t_max = engine.cfg.t_max
    idx = model.index()
    if idx is None:
        return []
    expired = model.clock - idx.last_update[: idx.n] >= t_max
    if not expired.any():
        return []
    dead = [int(c) for c in idx.ids[: idx.n][expired]]
    events = [Event(KILLED, model.clock, cid, model.clusters[cid].label or None) for cid in dead]
    touched = any(model.clusters[c].edges for c in dead)
    model.remove(dead)
    if touched:
        events += relabel_components(model)
    return events
