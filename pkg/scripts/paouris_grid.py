"""Ratio |Z_alpha|^(1/n) / sqrt(alpha/n) over a grid of dimensions and alpha."""
import argparse

from polythresh.bodies import paouris_ratio
from polythresh.core import SeedSpec
from polythresh.samplers import make_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kinds", nargs="+", default=["cube_solid", "ball"])
    ap.add_argument("--max-dim", type=int, default=6)
    ap.add_argument("--M", type=int, default=512)
    ap.add_argument("--probes", type=int, default=200_000)
    args = ap.parse_args()
    print("kind,n,alpha,ratio")
    for kind in args.kinds:
        for n in range(2, args.max_dim + 1):
            for alpha in range(2, n + 1):
                r = paouris_ratio(make_spec(kind, n), alpha, M=args.M, probes=args.probes,
                                  seed=SeedSpec(51, 10 * n + alpha))
                print(f"{kind},{n},{alpha},{r:.4f}")


if __name__ == "__main__":
    main()
