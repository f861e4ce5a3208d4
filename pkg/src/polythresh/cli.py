"""Command line entry point: ``python3 -m polythresh <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 numerical diagnostic,
4 I/O error.
"""
from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import __version__
from .bodies import centroid_outer_volume, inclusion_check_LqZ, reverse_inclusion_check
from .bounds import ThresholdQuery, central_lower, central_upper, threshold_N
from .core import SeedSpec
from .depth import depth_continuous, depth_empirical, direction_battery, floating_body
from .harness import (ConfigError, DiagnosticError, SweepConfig, check_writable, emit_manifest,
                      read_config, read_manifests, replay, rows_to_jsonl,
                      run_groemer_compare, run_sandwich, run_sweep, spec_from_args)
from .hull import INDETERMINATE_LIMIT, volume_ratio_mc
from .samplers import SpecError, sample

EXIT_OK, EXIT_CONFIG, EXIT_DIAGNOSTIC, EXIT_IO = 0, 2, 3, 4


def _common(p):
    p.add_argument("--config", help="key=value config file with [section] headers")
    p.add_argument("--seed", type=int, help="master seed (u64)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")


def _spec_args(p):
    p.add_argument("--kind")
    p.add_argument("--dim", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--isotropic", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polythresh", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw points from a distribution")
    _common(p), _spec_args(p)
    p.add_argument("--count", type=int, default=1000)

    p = sub.add_parser("ratio", help="estimate E|K_N| / |K|")
    _common(p), _spec_args(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--R", type=int, default=200)
    p.add_argument("--M", type=int, default=200)

    p = sub.add_parser("depth", help="half-space depth of a point")
    _common(p), _spec_args(p)
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.add_argument("--sample-size", type=int, default=0, help="0 = population depth")
    p.add_argument("--budget", type=int, default=2048)

    p = sub.add_parser("floating-body", help="outer polytope of the floating body")
    _common(p), _spec_args(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--probes", type=int, default=200_000)

    p = sub.add_parser("centroid-body", help="centroid body volume and inclusion checks")
    _common(p), _spec_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--directions", type=int, default=256)
    p.add_argument("--probes", type=int, default=200_000)
    p.add_argument("--trials", type=int, default=0, help="also run inclusion checks")

    p = sub.add_parser("bounds", help="evaluate the central lemma bounds")
    _common(p)
    p.add_argument("--volA", type=float, required=True)
    p.add_argument("--inf-q", type=float, required=True)
    p.add_argument("--sup-q", type=float, required=True)
    p.add_argument("--wet", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("thresholds", help="threshold point counts")
    _common(p)
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--beta", type=float)

    p = sub.add_parser("sweep", help="ratio sweep over (n, N) cells")
    _common(p)
    p.add_argument("--manifest", help="manifest path (default <out>.manifest.jsonl)")
    p.add_argument("--timing", action="store_true", help="fill elapsed_ms (breaks byte replay)")

    p = sub.add_parser("sandwich", help="central lemma sandwich experiment")
    _common(p), _spec_args(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--R", type=int, default=200)
    p.add_argument("--M", type=int, default=200)

    p = sub.add_parser("groemer", help="cube against the equal-volume ball")
    _common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--R", type=int, default=2000)
    p.add_argument("--M", type=int, default=0)

    p = sub.add_parser("replay", help="re-run a sweep manifest and compare bytes")
    _common(p)
    p.add_argument("manifest")
    p.add_argument("--record", type=int, default=-1, help="record index in the manifest file")
    return ap


def _write(text: str, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _records(rows, fmt):
    if fmt == "jsonl":
        return rows_to_jsonl(rows)
    keys = list(rows[0]) if rows else []
    lines = [",".join(keys)] + [",".join(str(r[k]) for k in keys) for r in rows]
    return "\n".join(lines) + "\n"


def _spec(args, cfg):
    fields = dict(cfg.get("spec", {}))
    kind = args.kind or fields.get("kind")
    dim = args.dim or (int(fields["dim"]) if fields.get("dim") else None)
    if kind is None or dim is None:
        raise ConfigError("need --kind and --dim (or a [spec] section)")
    beta = args.beta if args.beta is not None else (float(fields["beta"]) if fields.get("beta") else None)
    iso = args.isotropic or fields.get("isotropic", "no").lower() in ("yes", "true", "1")
    return spec_from_args(kind, dim, beta, iso)


def _seed(args, cfg, default=0):
    if args.seed is not None:
        value = args.seed
    else:
        value = int(cfg.get("run", {}).get("seed", cfg.get("sweep", {}).get("seed", default)))
    if not 0 <= value < 2 ** 64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    return SeedSpec(value)


def run(args) -> int:
    cfg = read_config(args.config) if args.config else {}
    if args.jobs < 1:
        raise ConfigError("--jobs must be positive")
    cmd = args.command

    if cmd == "sweep":
        fields = dict(cfg.get("spec", {}))
        fields.update(cfg.get("sweep", {}))
        if args.seed is not None:
            fields["seed"] = str(args.seed)
        if args.timing:
            fields["timing"] = "yes"
        sc = SweepConfig.from_fields(fields, output=args.out)
        manifest_path = args.manifest or (sc.output + ".manifest.jsonl" if sc.output else None)
        check_writable(sc.output)
        check_writable(manifest_path)
        result = run_sweep(sc, jobs=args.jobs)
        _write(result.csv_text if args.format == "csv" else rows_to_jsonl(result.rows), sc.output)
        if manifest_path:
            emit_manifest(result.manifest, manifest_path)
        return EXIT_OK

    if cmd == "replay":
        check_writable(args.out)
        manifest = read_manifests(args.manifest)[args.record]
        res = replay(manifest, jobs=args.jobs)
        if args.out:
            _write(res.sweep.csv_text, args.out)
        status = "match" if res.matches else "MISMATCH"
        print(f"replay {status}: expected {res.expected_sha256} got {res.actual_sha256}", file=sys.stderr)
        return EXIT_OK if res.matches else EXIT_DIAGNOSTIC

    check_writable(args.out)
    if cmd == "bounds":
        low = central_lower(args.volA, args.inf_q, args.N, args.n)
        up = central_upper(args.volA, args.sup_q, args.wet, args.N)
        rows = [{"lower": low.clamped, "lower_raw": low.raw, "log_correction": low.log_correction,
                 "degenerate": low.degenerate, "upper": up}]
    elif cmd == "thresholds":
        t = threshold_N(ThresholdQuery(args.family, args.n, args.epsilon, args.beta))
        rows = [{"family": args.family, "n": args.n, "epsilon": args.epsilon,
                 "log_N_low": t.log_low, "log_N_high": t.log_high, "N_low": t.low, "N_high": t.high}]
    elif cmd == "groemer":
        rep = run_groemer_compare(args.n, args.N, args.R, args.M, _seed(args, cfg))
        rows = [{"n": rep.n, "N": rep.N, "cube_mean": rep.body.mean, "cube_stderr": rep.body.stderr,
                 "ball_mean": rep.ball.mean, "ball_stderr": rep.ball.stderr, "sigma": rep.sigma,
                 "ordered": rep.ordered}]
    else:
        spec = _spec(args, cfg)
        seed = _seed(args, cfg)
        if cmd == "sample":
            pts = sample(spec, args.count, seed).points
            rows = [{f"x{i}": float(v) for i, v in enumerate(p)} for p in pts]
        elif cmd == "ratio":
            est = volume_ratio_mc(spec, args.N, args.R, args.M, seed, jobs=args.jobs)
            if est.indeterminate_rate > INDETERMINATE_LIMIT:
                raise DiagnosticError(est.warnings[-1])
            rows = [{"family": spec.kind, "n": spec.dim, "N": args.N, "ratio": est.mean,
                     "stderr": est.stderr, "R": args.R, "M": args.M, "seed": seed.master_seed,
                     "indeterminate": est.indeterminate}]
        elif cmd == "depth":
            x = np.array([float(v) for v in args.point.split(",")])
            if len(x) != spec.dim:
                raise ConfigError("point dimension does not match --dim")
            if args.sample_size > 0:
                rep = depth_empirical(x, sample(spec, args.sample_size, seed).points, args.budget, seed)
                mode = "empirical"
            else:
                rep = depth_continuous(spec, x, budget=args.budget, seed=seed)
                mode = "population"
            rows = [{"mode": mode, "depth": rep.estimate, "directions": rep.directions_tried}]
        elif cmd == "floating-body":
            D = direction_battery(spec.dim, args.directions, seed)
            fb = floating_body(spec, args.delta, D, probes=args.probes, seed=seed)
            rows = [{"delta": args.delta, "volume": fb.volume_estimate, "stderr": fb.stderr,
                     "wet_volume": spec.reference_volume - fb.volume_estimate}]
        elif cmd == "centroid-body":
            cb = centroid_outer_volume(spec, args.alpha, M=args.directions, probes=args.probes, seed=seed)
            row = {"alpha": args.alpha, "outer_volume": cb.outer_volume, "stderr": cb.stderr,
                   "in_regime": cb.in_regime}
            if args.trials:
                fwd = inclusion_check_LqZ(spec, args.alpha, args.trials, seed=seed)
                rev = reverse_inclusion_check(spec, args.alpha, args.trials, seed=seed)
                row.update(forward_violations=fwd.violations, forward_max_ratio=fwd.max_ratio,
                           reverse_violations=rev.violations, reverse_max_ratio=rev.max_ratio)
            rows = [row]
        elif cmd == "sandwich":
            res = run_sandwich(spec, args.N, args.delta, args.directions, args.R, args.M, seed,
                               jobs=args.jobs)
            b = res.bounds
            rows = [{"family": spec.kind, "n": spec.dim, "N": args.N, "delta": args.delta,
                     "lower": b.lower, "estimate": res.estimate, "upper": b.upper,
                     "sigma_lower": res.sigma_lower, "sigma_upper": res.sigma_upper,
                     "inf_q": b.inf_q_inside, "sup_q": b.sup_q_outside,
                     "sup_q_measured": res.sup_q_measured, "verdict": res.verdict}]
        else:  # pragma: no cover - argparse restricts choices
            raise ConfigError(f"unknown command {cmd}")
    _write(_records(rows, args.format), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return run(args)
    except (ConfigError, SpecError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DiagnosticError as exc:
        print(f"numerical diagnostic: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
