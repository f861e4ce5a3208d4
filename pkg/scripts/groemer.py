"""Mean hull volume for the square or cube against the ball of equal volume."""
import argparse

from polythresh.core import SeedSpec
from polythresh.harness import run_groemer_compare


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2, choices=(2, 3))
    ap.add_argument("--N", type=int, nargs="+", default=[3, 5, 10, 30, 100])
    ap.add_argument("--R", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=71)
    args = ap.parse_args()
    print("n,N,cube,cube_se,ball,ball_se,ordered")
    for N in args.N:
        r = run_groemer_compare(args.n, N, args.R, seed=SeedSpec(args.seed, N))
        print(f"{r.n},{N},{r.body.mean:.6f},{r.body.stderr:.6f},{r.ball.mean:.6f},"
              f"{r.ball.stderr:.6f},{r.ordered}")


if __name__ == "__main__":
    main()
