"""Fixed-radius runs at several radii next to the adaptive defaults on the toy stream."""

import argparse

from driftstream import Engine, EngineConfig
from driftstream.data import toy_dataset
from driftstream.harness import score_horizon


def describe(name, cfg, toy):
    e = Engine(cfg)
    e.run(toy)
    a, p = score_horizon(e, toy)
    noise = sum(e.predict(s.features) is None for s in toy) / len(toy)
    print(f"{name:>14}: clusters={len(e.model):4d} macros={len(e.model.macro_labels()):3d} "
          f"noise={noise:.2f} ari={a:.3f} purity={p:.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--d", type=int, default=5)
    args = ap.parse_args()
    toy = toy_dataset(args.seed)
    for r in (0.01, 0.05, 0.1, 0.5):
        describe(f"fixed r={r}", EngineConfig.fixed(r, d=args.d), toy)
    describe("adaptive", EngineConfig.adaptive(25, d=args.d, k=2), toy)


if __name__ == "__main__":
    main()
