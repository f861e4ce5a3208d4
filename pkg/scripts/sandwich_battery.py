"""Central-lemma sandwich over the standard battery, one line per cell."""
import argparse

from polythresh.core import SeedSpec
from polythresh.harness import run_sandwich
from polythresh.samplers import make_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kinds", nargs="+", default=["cube_solid", "ball"])
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--N", type=int, nargs="+", default=[20, 50, 200])
    ap.add_argument("--delta", type=float, nargs="+", default=[0.02, 0.05])
    ap.add_argument("--R", type=int, default=300)
    ap.add_argument("--M", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    print("kind,n,N,delta,lower,lower_raw,estimate,upper,inf_q,sup_q_measured,verdict")
    task = 0
    for kind in args.kinds:
        for n in args.dims:
            for N in args.N:
                for d in args.delta:
                    task += 1
                    r = run_sandwich(make_spec(kind, n), N, d, R=args.R, M=args.M,
                                     seed=SeedSpec(args.seed, task))
                    b = r.bounds
                    print(f"{kind},{n},{N},{d},{b.lower:.6g},{b.lower_raw:.6g},{r.estimate:.6g},"
                          f"{b.upper:.6g},{b.inf_q_inside:.6g},{r.sup_q_measured:.6g},{r.verdict}")


if __name__ == "__main__":
    main()
