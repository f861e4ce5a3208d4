"""Ratio E|K_N| / |K| across multiples of the threshold point count.

    python3 scripts/threshold_transition.py --kind cube_vertices --n 10 15 --R 200

Writes a schema-1 CSV (and its manifest when --out is given).
"""
import argparse
import sys

from polythresh.harness import SweepConfig, emit_manifest, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", default="cube_vertices", choices=("cube_vertices", "cube_solid"))
    ap.add_argument("--n", type=int, nargs="+", default=[8, 12, 15])
    ap.add_argument("--mults", default="0.5,1,2,4,8,16,64")
    ap.add_argument("--R", type=int, default=200)
    ap.add_argument("--M", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()
    cfg = SweepConfig(args.kind, args.n, f"threshold:{args.kind}:{args.mults}", args.R, args.M,
                      args.seed, output=args.out)
    res = run_sweep(cfg, jobs=args.jobs)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(res.csv_text)
        emit_manifest(res.manifest, args.out + ".manifest.jsonl")
    else:
        sys.stdout.write(res.csv_text)


if __name__ == "__main__":
    main()
