"""Horizon-based prequential evaluation, grid search and the timing benchmark."""

from __future__ import annotations

import csv
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import fmean
from typing import Optional

import numpy as np

from .data import BlobSpec, gen_blobs, random_blob_spec
from .engine import Engine
from .metrics import NOISE_CLASS, ari, build_contingency, purity
from .model import Adaptive, EngineConfig, Fixed

TRACE_HEADER = ["clock", "ari", "purity", "clusters", "macros"]
BENCH_HEADER = ["dims", "n", "mean_s", "min_s"]
RANKING_HEADER = ["rank", "params", "mean_ari", "mean_purity", "rows"]


@dataclass(frozen=True)
class EvalConfig:
    horizon: int = 20
    interval: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.interval < 1:
            raise ValueError("interval must be >= 1")


@dataclass(frozen=True)
class TraceRow:
    clock: int
    ari: float
    purity: float
    clusters: int
    macros: int


@dataclass
class EvalTrace:
    rows: list = field(default_factory=list)

    @property
    def mean_ari(self) -> float:
        return fmean(r.ari for r in self.rows) if self.rows else float("nan")

    @property
    def mean_purity(self) -> float:
        return fmean(r.purity for r in self.rows) if self.rows else float("nan")

    @property
    def summary(self) -> dict:
        return {"mean_ari": self.mean_ari, "mean_purity": self.mean_purity, "rows": len(self.rows)}

    def write_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for r in self.rows:
                w.writerow([r.clock, repr(r.ari), repr(r.purity), r.clusters, r.macros])


def score_horizon(engine: Engine, horizon) -> tuple[float, float]:
    """ARI of macro labels and purity of covering micro-clusters on ``horizon``.

    Uncovered samples, and for ARI samples covered only by a micro-cluster,
    fall into the shared NOISE_CLASS column.
    """
    truth, macro, micro = [], [], []
    for s in horizon:
        cid, label = engine.assign(s)
        truth.append(s.label)
        macro.append(NOISE_CLASS if label is None else label)
        micro.append(NOISE_CLASS if cid is None else cid)
    return ari(build_contingency(truth, macro)), purity(build_contingency(truth, micro))


def prequential_run(stream, engine_cfg: EngineConfig, eval_cfg: EvalConfig = EvalConfig()) -> EvalTrace:
    """Test-then-train over ``stream``.

    After ingesting the sample at an evaluation point, the frozen model is
    scored on the H samples that follow it, which are ingested later as the
    cursor reaches them. A stream of n samples yields at most n - H rows.
    """
    stream = list(stream)
    H = eval_cfg.horizon
    if H < 2:
        raise ValueError("horizon must be >= 2 for ARI to be defined")
    if len(stream) <= H:
        raise ValueError(f"stream of {len(stream)} samples is not longer than the horizon {H}")
    if any(s.label is None for s in stream):
        raise ValueError("prequential evaluation needs ground-truth labels on every sample")
    engine = Engine(engine_cfg)
    trace = EvalTrace()
    due = None
    for i, s in enumerate(stream):
        engine.ingest(s)
        if i + H >= len(stream):
            continue
        if due is not None and s.timestamp < due:
            continue
        due = s.timestamp + eval_cfg.interval
        a, p = score_horizon(engine, stream[i + 1:i + 1 + H])
        trace.rows.append(TraceRow(s.timestamp, a, p, len(engine.model),
                                   len(engine.model.macro_labels())))
    return trace


# --- grid search ----------------------------------------------------------

ADAPTIVE_PARAMS = ("t_w", "d", "k")
FIXED_PARAMS = ("r", "d")


def default_grid(mode: str = "adaptive", points: int = 10) -> dict:
    """Evenly spaced discretisation of the searched parameter ranges.

    k must stay above 1, so its points are spaced over (1, 10].
    """
    d = sorted({int(round(v)) for v in np.linspace(2, 20, points)})
    if mode == "adaptive":
        t_w = sorted({int(round(v)) for v in np.linspace(60, 1200, points)})
        k = [round(float(v), 6) for v in np.linspace(1, 10, points + 1)[1:]]
        return {"t_w": t_w, "d": d, "k": k}
    if mode == "fixed":
        r = [round(float(v), 6) for v in np.linspace(0.01, 1.0, points)]
        return {"r": r, "d": d}
    raise ValueError(f"unknown mode {mode!r}")


def make_config(params: dict, base: Optional[EngineConfig] = None) -> EngineConfig:
    """Overlay grid parameters (t_w or r, d, k) on a base configuration."""
    params = dict(params)
    if "t_w" in params and "r" in params:
        raise ValueError("a configuration takes either t_w (adaptive) or r (fixed), not both")
    if base is None:
        base = EngineConfig.adaptive(t_w=int(params.get("t_w", 60))) if "r" not in params \
            else EngineConfig.fixed(r=float(params["r"]))
    policy = base.radius_policy
    if "t_w" in params:
        policy = Adaptive(int(params.pop("t_w")))
    elif "r" in params:
        policy = Fixed(float(params.pop("r")))
    unknown = set(params) - {"d", "k", "t_max", "r_min"}
    if unknown:
        raise ValueError(f"unknown grid parameters {sorted(unknown)}")
    if "d" in params:
        params["d"] = int(params["d"])
    return replace(base, radius_policy=policy, **params)


@dataclass(frozen=True)
class GridResult:
    params: tuple
    config: EngineConfig
    mean_ari: float
    mean_purity: float
    rows: int

    @property
    def param_dict(self) -> dict:
        return dict(self.params)


def expand_grid(grids: dict) -> list[tuple]:
    if not grids or any(len(v) == 0 for v in grids.values()):
        raise ValueError("every grid parameter needs at least one value")
    names = sorted(grids)
    return [tuple(zip(names, combo)) for combo in itertools.product(*(grids[n] for n in names))]


def final_assignment(stream, engine_cfg: EngineConfig) -> tuple[float, float, Engine]:
    """Ingest the whole stream, flush, then score every sample against the final model."""
    stream = list(stream)
    engine = Engine(engine_cfg)
    engine.run(stream)
    a, p = score_horizon(engine, stream)
    return a, p, engine


def grid_search(stream, grids: dict, eval_cfg: EvalConfig = EvalConfig(),
                base: Optional[EngineConfig] = None, workers: int = 1,
                objective: str = "prequential") -> list[GridResult]:
    """Evaluate every configuration, ranked by ARI then purity.

    ``objective="prequential"`` scores mean prequential ARI/purity;
    ``objective="final"`` scores the final model on the whole stream, which
    suits static datasets replayed as a stream. Exact ties fall back to the
    lexicographic order of the parameter tuples.
    """
    stream = list(stream)
    combos = expand_grid(grids)
    if objective not in ("prequential", "final"):
        raise ValueError(f"unknown objective {objective!r}")

    def run(params):
        cfg = make_config(dict(params), base)
        if objective == "final":
            a, p, _ = final_assignment(stream, cfg)
            return GridResult(params, cfg, a, p, 1)
        tr = prequential_run(stream, cfg, eval_cfg)
        return GridResult(params, cfg, tr.mean_ari, tr.mean_purity, len(tr.rows))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, combos))
    else:
        results = [run(p) for p in combos]
    return sorted(results, key=lambda g: (-g.mean_ari, -g.mean_purity, g.params))


def write_ranking(results, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RANKING_HEADER)
        for rank, g in enumerate(results, start=1):
            params = ";".join(f"{k}={v}" for k, v in g.params)
            w.writerow([rank, params, repr(g.mean_ari), repr(g.mean_purity), g.rows])


def average_params(best: list[dict]) -> dict:
    """Mean of per-user best parameters; integer parameters are rounded."""
    if not best:
        raise ValueError("nothing to average")
    keys = sorted(best[0])
    if any(sorted(b) != keys for b in best):
        raise ValueError("all parameter sets must name the same parameters")
    out = {}
    for k in keys:
        mean = fmean(float(b[k]) for b in best)
        out[k] = int(round(mean)) if k in ("t_w", "d") else mean
    return out


# --- timing ---------------------------------------------------------------

@dataclass(frozen=True)
class BenchRow:
    dims: int
    n: int
    mean_s: float
    min_s: float


def bench_time(dims, n_samples: int, engine_cfg: EngineConfig, repeats: int = 1,
               n_blobs: int = 4, seed: int = 0, blob_spec: Optional[BlobSpec] = None) -> list[BenchRow]:
    """Single-threaded wall time to ingest an n-sample blob stream, per dimensionality."""
    from threadpoolctl import threadpool_limits

    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    rows = []
    for D in dims:
        spec = blob_spec if blob_spec is not None else random_blob_spec(n_blobs, D, n_samples, seed)
        stream = gen_blobs(spec)
        times = []
        with threadpool_limits(limits=1):
            for _ in range(repeats):
                engine = Engine(engine_cfg)
                t0 = time.perf_counter()
                engine.run(stream)
                times.append(time.perf_counter() - t0)
        rows.append(BenchRow(int(D), len(stream), fmean(times), min(times)))
    return rows


def write_bench(rows, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for r in rows:
            w.writerow([r.dims, r.n, f"{r.mean_s:.6f}", f"{r.min_s:.6f}"])
