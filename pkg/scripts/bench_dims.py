"""Single-thread ingest time over a range of dimensionalities (4 Gaussian blobs)."""

import argparse

from driftstream import EngineConfig
from driftstream.harness import bench_time, write_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="2,10,100,500,1000,2000,5000,10000")
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--out", default="bench.csv")
    args = ap.parse_args()
    cfg = EngineConfig.adaptive(600, d=5, k=5)
    dims = [int(v) for v in args.dims.split(",")]
    rows = []
    for D in dims:
        (row,) = bench_time([D], args.n, cfg, repeats=args.repeats)
        rows.append(row)
        print(f"dims={row.dims:6d} n={row.n} mean={row.mean_s:.2f}s")
    write_bench(rows, args.out)


if __name__ == "__main__":
    main()
