"""Command-line front end: gen, run, eval, grid, bench.

Every command can read a JSON config file (``--config``); flags override
file values. Outputs go under ``--out`` with fixed file names.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import data as ds
from .engine import Engine, dumps
from .harness import (
    EvalConfig,
    bench_time,
    default_grid,
    grid_search,
    prequential_run,
    write_bench,
    write_ranking,
)
from .model import ContractViolation, EngineConfig, validate_model

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 2, 3, 4

DEFAULTS = {
    "mode": "adaptive",
    "t_w": 25,
    "r": 0.1,
    "d": 5,
    "k": 2.0,
    "t_max": 10_000,
    "r_min": 1e-9,
    "pair_cap": 4096,
    "label_column": "label",
    "timestamp_column": None,
    "impute": False,
    "horizon": 20,
    "interval": 1,
    "points": 10,
    "objective": "prequential",
    "workers": 1,
}

ENGINE_KEYS = ("mode", "t_w", "r", "d", "k", "t_max", "r_min", "pair_cap", "seed")
CONFIG_KEYS = set(DEFAULTS) | {"seed", "input", "generator", "output_dir", "grid"}

log = logging.getLogger("driftstream")


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


def _load_config(path):
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise UsageError(f"{p}: cannot read config: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"{p}:1: config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        line = _line_of(text, sorted(unknown)[0])
        raise UsageError(f"{p}:{line}: unknown config keys {sorted(unknown)}")
    return cfg


def _line_of(text, key):
    for i, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return i
    return 1


def _settings(args) -> dict:
    """Defaults < config file < DRIFTSTREAM_SEED (seed only) < flags."""
    merged = dict(DEFAULTS)
    merged.update(_load_config(getattr(args, "config", None)))
    if "seed" not in merged and os.environ.get("DRIFTSTREAM_SEED"):
        try:
            merged["seed"] = int(os.environ["DRIFTSTREAM_SEED"])
        except ValueError:
            raise UsageError("DRIFTSTREAM_SEED must be an integer") from None
    for key, val in vars(args).items():
        if val is not None and key not in ("cmd", "config", "func"):
            merged[key] = val
    merged.setdefault("seed", 0)
    return merged


def _engine_config(s: dict) -> EngineConfig:
    raw = {k: s[k] for k in ENGINE_KEYS if k in s}
    try:
        return EngineConfig.from_dict(raw)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"bad engine configuration: {exc}") from None


def _stream(s: dict):
    src, gen = s.get("input"), s.get("generator")
    if s.get("toy"):
        gen = {"kind": "toy"}
    if (src is None) == (gen is None):
        raise UsageError("give exactly one input source: --input PATH or a generator (--toy)")
    if gen is not None:
        return _generate(gen, s["seed"])
    stream = ds.load_csv(src, s["label_column"], s["timestamp_column"])
    if s.get("impute"):
        stream = ds.impute(stream)
    return stream


def _generate(gen: dict, seed: int):
    kind = gen.get("kind")
    seed = int(gen.get("seed", seed))
    if kind == "toy":
        return ds.toy_dataset(seed, per_cluster=int(gen.get("per_cluster", 333)))
    if kind == "blobs":
        try:
            spec = ds.random_blob_spec(int(gen["n_blobs"]), int(gen["dims"]), int(gen["n"]),
                                       seed=seed, std=float(gen.get("std", 1.0)))
        except KeyError as exc:
            raise UsageError(f"blobs generator needs {exc.args[0]!r}") from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        stream = ds.gen_blobs(spec)
        return ds.order_by_label(stream) if gen.get("sort") else stream
    raise UsageError(f"unknown generator kind {kind!r} (expected 'toy' or 'blobs')")


def _out_dir(s: dict) -> Path:
    out = s.get("output_dir")
    if out is None:
        raise UsageError("an output directory is required (--out DIR)")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check(engine: Engine):
    problems = validate_model(engine.model, engine.cfg)
    if problems:
        raise InvariantError("; ".join(problems[:5]))


def cmd_gen(args) -> int:
    s = _settings(args)
    if bool(s.get("toy")) == (s.get("blobs") is not None):
        raise UsageError("choose exactly one of --toy or --blobs N")
    if s.get("toy"):
        stream = ds.toy_dataset(s["seed"])
    else:
        gen = {"kind": "blobs", "n_blobs": s["blobs"], "dims": s.get("dims") or 2,
               "n": s.get("n") or 1000, "std": s.get("std") or 1.0, "sort": s.get("sort")}
        stream = _generate(gen, s["seed"])
    rows = ds.save_csv(stream, s["output"])
    print(f"wrote {rows} rows to {s['output']}")
    return EXIT_OK


def cmd_run(args) -> int:
    s = _settings(args)
    cfg = _engine_config(s)
    stream = _stream(s)
    out = _out_dir(s)
    engine = Engine(cfg)
    events, flushes = [], []
    for sample in stream:
        before = engine.flushes
        events += engine.ingest(sample)
        if engine.flushes != before:
            flushes.append(_flush_row(engine))
    before = engine.flushes
    events += engine.flush()
    if engine.flushes != before:
        flushes.append(_flush_row(engine))
    _check(engine)

    snap = engine.snapshot()
    snap["config"] = cfg.to_dict()
    (out / "snapshot.json").write_text(dumps(snap))
    with (out / "events.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["clock", "event", "cluster", "label", "other"])
        for e in events:
            w.writerow([e.clock, e.kind, e.cluster, "" if e.label is None else e.label,
                        "" if e.other is None else e.other])
    with (out / "flushes.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["flush", "clock", "radius", "clusters", "macros"])
        w.writerows(flushes)
    print(f"{len(stream)} samples, {len(engine.model)} clusters, "
          f"{len(engine.model.macro_labels())} macro labels -> {out}")
    return EXIT_OK


def _flush_row(engine: Engine):
    m = engine.model
    return [engine.flushes, m.clock, repr(m.previous_radius), len(m), len(m.macro_labels())]


def cmd_eval(args) -> int:
    s = _settings(args)
    cfg = _engine_config(s)
    stream = _stream(s)
    out = _out_dir(s)
    try:
        ecfg = EvalConfig(int(s["horizon"]), int(s["interval"]), int(s["seed"]))
        trace = prequential_run(stream, cfg, ecfg)
    except ValueError as exc:
        raise ds.DataError(str(exc)) from None
    trace.write_csv(out / "trace.csv")
    print(json.dumps(trace.summary, sort_keys=True))
    return EXIT_OK


def cmd_grid(args) -> int:
    s = _settings(args)
    base = _engine_config(s)
    stream = _stream(s)
    out = _out_dir(s)
    grids = s.get("grid")
    if isinstance(grids, str):
        try:
            grids = json.loads(grids)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--grid is not valid JSON: {exc.msg}") from None
    if grids is None:
        grids = default_grid(base.mode, int(s["points"]))
    ecfg = EvalConfig(int(s["horizon"]), int(s["interval"]), int(s["seed"]))
    try:
        results = grid_search(stream, grids, ecfg, base=base, workers=int(s["workers"]),
                              objective=s["objective"])
    except (TypeError, AttributeError):
        raise UsageError("grid must map parameter names to lists of values") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_ranking(results, out / "ranking.csv")
    best = results[0]
    print(json.dumps({"best": best.param_dict, "mean_ari": best.mean_ari,
                      "mean_purity": best.mean_purity, "configs": len(results)}, sort_keys=True))
    return EXIT_OK


def cmd_bench(args) -> int:
    s = _settings(args)
    cfg = _engine_config(s)
    out = _out_dir(s)
    try:
        dims = [int(v) for v in str(s.get("dims") or "2,10,100").split(",") if v.strip()]
    except ValueError:
        raise UsageError("--dims takes a comma-separated list of integers") from None
    rows = bench_time(dims, int(s.get("n") or 1000), cfg, repeats=int(s.get("repeats") or 1),
                      n_blobs=int(s.get("blobs") or 4), seed=int(s["seed"]))
    write_bench(rows, out / "bench.csv")
    for r in rows:
        print(f"dims={r.dims} n={r.n} mean={r.mean_s:.3f}s min={r.min_s:.3f}s")
    return EXIT_OK


def _engine_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--mode", choices=["adaptive", "fixed"])
    p.add_argument("--t-w", dest="t_w", type=int, help="window length in ticks (adaptive)")
    p.add_argument("--r", type=float, help="radius (fixed mode)")
    p.add_argument("--d", type=int, help="density threshold for macro promotion")
    p.add_argument("--k", type=float, help="kernel divisor, > 1")
    p.add_argument("--t-max", dest="t_max", type=int, help="idle ticks before a cluster dies")
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--seed", type=int)


def _input_flags(p):
    p.add_argument("--input", help="dataset CSV")
    p.add_argument("--toy", action="store_true", default=None, help="use the generated toy stream")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--timestamp-column", dest="timestamp_column")
    p.add_argument("--impute", action="store_true", default=None,
                   help="fill missing cells by iterative regression before streaming")
    p.add_argument("--out", dest="output_dir", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftstream", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="write a synthetic dataset CSV")
    p.add_argument("--toy", action="store_true", default=None)
    p.add_argument("--blobs", type=int, help="number of Gaussian blobs")
    p.add_argument("--dims", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--std", type=float)
    p.add_argument("--sort", action="store_true", default=None, help="sort blob samples by label")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="stream a dataset through one engine")
    _engine_flags(p)
    _input_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="horizon-based prequential evaluation")
    _engine_flags(p)
    _input_flags(p)
    p.add_argument("--h", dest="horizon", type=int, help="horizon H (default 20)")
    p.add_argument("--t", dest="interval", type=int, help="evaluation interval in ticks (default 1)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="exhaustive grid search")
    _engine_flags(p)
    _input_flags(p)
    p.add_argument("--grid", help='JSON object of value lists, e.g. \'{"t_w": [20, 50], "d": [2, 5]}\'')
    p.add_argument("--points", type=int, help="points per range for the default grid")
    p.add_argument("--objective", choices=["prequential", "final"])
    p.add_argument("--workers", type=int)
    p.add_argument("--h", dest="horizon", type=int)
    p.add_argument("--t", dest="interval", type=int)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("bench", help="single-thread ingest timing on blob streams")
    _engine_flags(p)
    p.add_argument("--dims", help="comma-separated dimensionalities")
    p.add_argument("--n", type=int, help="samples per dataset")
    p.add_argument("--blobs", type=int, help="number of blobs (default 4)")
    p.add_argument("--repeats", type=int)
    p.add_argument("--out", dest="output_dir")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"driftstream {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantError, ContractViolation) as exc:
        print(f"driftstream {args.cmd}: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ds.DataError, ValueError, OSError) as exc:
        print(f"driftstream {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
