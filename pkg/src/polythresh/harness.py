"""Experiment orchestration: sweeps, the central-lemma sandwich, Groemer's comparison.

Config files are flat ``key = value`` lines under ``[section]`` headers::

    [spec]
    kind = cube_vertices
    beta =              # beta kind only
    isotropic = no

    [sweep]
    n_list = 15
    N_rule = threshold:cube_vertices:0.5,4    # or  list:9,73
    R = 200
    M = 200
    seed = 1
    output = sweep.csv

``threshold:<family>:<m1>,<m2>,...`` multiplies the family's threshold count
(epsilon = 0) by each m, rounding down for m < 1 and up otherwise.

Sweep CSVs start with ``#schema=1`` and have the columns in ``CSV_COLUMNS``.
Each run also appends one JSON record (the manifest) to ``<output>.manifest.jsonl``;
``replay`` re-runs it and compares the CSV hash.
"""
from __future__ import annotations

import configparser
import hashlib
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .bounds import BoundsReport, ThresholdQuery, central_lower, central_upper, threshold_N
from .core import Polygon2D, SeedSpec, hull_area_2d, rng_stream
from .depth import depth_continuous, depth_exact_2d_uniform, direction_battery, floating_body
from .hull import INDETERMINATE_LIMIT, RatioEstimate, build_hull, hull_volume, volume_ratio_mc
from .samplers import DistributionSpec, SpecError, ball_volume, make_spec, spec_from_fields

CSV_SCHEMA = "#schema=1"
CSV_COLUMNS = ("family", "n", "N", "ratio", "stderr", "R", "M", "seed", "elapsed_ms")


class ConfigError(ValueError):
    """Unusable configuration; detected before any sampling."""


class DiagnosticError(RuntimeError):
    """A numerical health check failed (e.g. too many indeterminate memberships)."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class SweepConfig:
    kind: str
    n_list: list
    N_rule: str
    R: int
    M: int
    seed: int
    output: Optional[str] = None
    beta: Optional[float] = None
    isotropic: bool = False
    timing: bool = False

    def __post_init__(self):
        if not self.n_list or any(int(n) < 1 for n in self.n_list):
            raise ConfigError("n_list must hold positive dimensions")
        if self.R < 1 or self.M < 1:
            raise ConfigError("R and M must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        try:
            for n in self.n_list:
                self.spec_for(n)
        except SpecError as exc:
            raise ConfigError(str(exc)) from None
        for n in self.n_list:
            resolve_N(self, n)

    def spec_for(self, n: int) -> DistributionSpec:
        return make_spec(self.kind, int(n), beta=self.beta, isotropic=self.isotropic)

    def to_fields(self) -> dict:
        return {"kind": self.kind, "n_list": ",".join(str(n) for n in self.n_list),
                "N_rule": self.N_rule, "R": str(self.R), "M": str(self.M), "seed": str(self.seed),
                "beta": "" if self.beta is None else repr(self.beta),
                "isotropic": "yes" if self.isotropic else "no",
                "timing": "yes" if self.timing else "no"}

    @classmethod
    def from_fields(cls, fields: dict, output: Optional[str] = None) -> "SweepConfig":
        try:
            return cls(kind=fields["kind"],
                       n_list=[int(v) for v in str(fields["n_list"]).split(",") if v.strip()],
                       N_rule=fields["N_rule"], R=int(fields["R"]), M=int(fields["M"]),
                       seed=int(fields["seed"]), output=output or fields.get("output"),
                       beta=float(fields["beta"]) if fields.get("beta") else None,
                       isotropic=str(fields.get("isotropic", "no")).lower() in ("yes", "true", "1"),
                       timing=str(fields.get("timing", "no")).lower() in ("yes", "true", "1"))
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ConfigError(f"bad config value: {exc}") from None


def read_config(path: str) -> dict:
    """Flatten a sectioned key=value file into {section: {key: value}}."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError:
        raise
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return {name: dict(parser[name]) for name in parser.sections()}


def sweep_config_from_file(path: str) -> SweepConfig:
    sections = read_config(path)
    fields = dict(sections.get("spec", {}))
    fields.update(sections.get("sweep", {}))
    return SweepConfig.from_fields(fields)


def resolve_N(cfg: SweepConfig, n: int) -> list:
    rule = cfg.N_rule.strip()
    kind, _, rest = rule.partition(":")
    try:
        if kind == "list":
            values = [int(v) for v in rest.split(",") if v.strip()]
        elif kind == "threshold":
            family, _, mults = rest.partition(":")
            query = ThresholdQuery(family, n, 0.0, cfg.beta if family.startswith("beta") else None) \
                if family != "beta_refined" else ThresholdQuery(family, n, 1.0, cfg.beta)
            base = threshold_N(query).low
            values = []
            for m in (float(v) for v in mults.split(",")):
                x = m * base
                values.append(int(math.floor(x)) if m < 1 else int(math.ceil(x)))
        else:
            raise ConfigError(f"unknown N_rule {rule!r}")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"unresolvable N_rule {rule!r}: {exc}") from None
    if not values or min(values) < 1:
        raise ConfigError(f"N_rule {rule!r} gives no positive N for n={n}")
    return sorted(set(values))


# --------------------------------------------------------------------------
# sweeps and manifests
# --------------------------------------------------------------------------

@dataclass
class SweepResult:
    rows: list
    csv_text: str
    manifest: dict
    estimates: list = field(repr=False, default_factory=list)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    buf.write(CSV_SCHEMA + "\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row[c]) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def rows_to_jsonl(rows: list) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)


def sweep_tasks(cfg: SweepConfig) -> list:
    """(n, N, SeedSpec) per cell in output order; the stream id is the cell index."""
    cells = sorted((int(n), N) for n in cfg.n_list for N in resolve_N(cfg, n))
    return [(n, N, SeedSpec(cfg.seed, i)) for i, (n, N) in enumerate(cells)]


def check_writable(path: Optional[str]):
    if not path:
        return
    parent = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK) or \
            (os.path.exists(path) and not os.access(path, os.W_OK)):
        raise OSError(f"cannot write to {path}")


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> SweepResult:
    """One CSV row per (n, N) cell, sorted by (n, N)."""
    check_writable(cfg.output)
    started = time.time()
    rows, estimates, tasks, notes = [], [], [], []
    for n, N, seed in sweep_tasks(cfg):
        t0 = time.perf_counter()
        est = volume_ratio_mc(cfg.spec_for(n), N, cfg.R, cfg.M, seed, jobs=jobs)
        elapsed = int(round(1000 * (time.perf_counter() - t0))) if cfg.timing else 0
        if est.indeterminate_rate > INDETERMINATE_LIMIT:
            raise DiagnosticError(f"cell n={n} N={N}: {est.warnings[-1]}")
        rows.append({"family": cfg.kind, "n": n, "N": N, "ratio": est.mean, "stderr": est.stderr,
                     "R": cfg.R, "M": cfg.M, "seed": cfg.seed, "elapsed_ms": elapsed})
        estimates.append(est)
        notes.extend(est.warnings)
        tasks.append({"n": n, "N": N, "master_seed": seed.master_seed, "stream_id": seed.stream_id,
                      "replication_stream_ids": [seed.child(r).stream_id for r in range(cfg.R)],
                      "indeterminate": est.indeterminate})
    csv_text = rows_to_csv(rows)
    manifest = {
        "schema": 1,
        "command": "sweep",
        "version": __version__,
        "config": cfg.to_fields(),
        "resolved_N": {str(n): resolve_N(cfg, n) for n in cfg.n_list},
        "tasks": tasks,
        "wall_clock_s": round(time.time() - started, 3),
        "warnings": notes,
        "csv_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
    }
    return SweepResult(rows, csv_text, manifest, estimates)


def emit_manifest(manifest: dict, path: str):
    """Append one self-contained JSON record."""
    with open(path, "a") as fh:
        fh.write(json.dumps(manifest, sort_keys=True) + "\n")


def read_manifests(path: str) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


@dataclass
class ReplayResult:
    matches: bool
    expected_sha256: str
    actual_sha256: str
    sweep: SweepResult
    seeds_consistent: bool = True


def replay(manifest: dict, jobs: int = 1) -> ReplayResult:
    """Re-run a sweep manifest and compare its CSV hash with the recorded one."""
    if manifest.get("command") != "sweep":
        raise ConfigError(f"cannot replay command {manifest.get('command')!r}")
    cfg = SweepConfig.from_fields(manifest["config"])
    result = run_sweep(cfg, jobs=jobs)
    recorded = [(t["master_seed"], t["stream_id"]) for t in manifest.get("tasks", [])]
    rerun = [(t["master_seed"], t["stream_id"]) for t in result.manifest["tasks"]]
    actual = result.manifest["csv_sha256"]
    return ReplayResult(actual == manifest.get("csv_sha256"), manifest.get("csv_sha256", ""),
                        actual, result, seeds_consistent=recorded == rerun)


# --------------------------------------------------------------------------
# sandwich experiment
# --------------------------------------------------------------------------

@dataclass
class SandwichResult:
    bounds: BoundsReport
    ratio: RatioEstimate
    estimate: float          # E|K_N| (absolute volume)
    sigma_estimate: float
    sigma_lower: float
    sigma_upper: float
    verdict: str             # PASS / FAIL / INCONCLUSIVE
    volA_stderr: float
    sup_q_measured: float
    boundary_probes: int

    @property
    def lower_slack(self) -> float:
        return self.estimate - (self.bounds.lower - 3 * self.sigma_lower)

    @property
    def upper_slack(self) -> float:
        return self.bounds.upper + 3 * self.sigma_upper - self.estimate


def _polygon_vertices(D, t):
    """Vertices of the planar polytope {x : D x <= t} (directions sorted by angle)."""
    order = np.argsort(np.arctan2(D[:, 1], D[:, 0]))
    D, t = D[order], t[order]
    verts = []
    for i in range(len(D)):
        j = (i + 1) % len(D)
        A = np.array([D[i], D[j]])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        v = np.linalg.solve(A, [t[i], t[j]])
        if np.all(D @ v <= t + 1e-9):
            verts.append(v)
    return np.array(verts)


def _boundary_probes(fb, count, rng):
    """Points on the boundary of the polytope fb, along random rays from 0."""
    n = fb.directions.shape[1]
    U = rng.standard_normal((count, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    proj = U @ fb.directions.T
    with np.errstate(divide="ignore", invalid="ignore"):
        reach = np.where(proj > 0, fb.offsets / proj, np.inf)
    return U * reach.min(axis=1)[:, None]


def _depth(spec, x, budget):
    if spec.dim == 2 and spec.kind == "cube_solid":
        s = spec.isotropic_scale
        return depth_exact_2d_uniform(x, Polygon2D.box(-s, s))
    return depth_continuous(spec, x, budget=budget).estimate


def run_sandwich(spec: DistributionSpec, N: int, delta: float, directions=64, R: int = 200,
                 M: int = 200, seed: SeedSpec = SeedSpec(0), fb_probes: int = 200_000,
                 depth_probes: int = 24, depth_budget: int = 96, min_depth_probes: int = 8,
                 jobs: int = 1) -> SandwichResult:
    """Central-lemma bounds with A = outer floating-body polytope, against MC.

    sup over A^c of q is at most delta by construction of the offsets; the
    battery value on wet-part probes is reported alongside as a check.  inf
    over A of q is attained at a vertex (q is quasi-concave), so it is taken
    over the polygon's vertices in the plane and over boundary probes above.
    """
    n = spec.dim
    D = direction_battery(n, directions, seed) if isinstance(directions, int) else np.asarray(directions)
    D = np.vstack([D, np.eye(n), -np.eye(n)])
    fb = floating_body(spec, delta, D, probes=fb_probes, seed=seed.child(1 << 20))
    volK = spec.reference_volume
    volA = fb.volume_estimate
    rng = rng_stream(seed.child((1 << 20) + 1))

    if n == 2:
        probes = _polygon_vertices(fb.directions, fb.offsets)
    else:
        probes = _boundary_probes(fb, depth_probes, rng)
    inf_q = min(_depth(spec, p, depth_budget) for p in probes) if len(probes) else 0.0

    from .samplers import draw_reference_uniform
    wet = draw_reference_uniform(spec, 4000, rng)
    wet = wet[~fb.contains(wet)][:depth_probes]
    sup_measured = max((_depth(spec, p, depth_budget) for p in wet), default=0.0)
    sup_q = delta

    lower = central_lower(volA, inf_q, N, n)
    upper = central_upper(volA, sup_q, max(volK - volA, 0.0), N)
    ratio = volume_ratio_mc(spec, N, R, M, seed, jobs=jobs)
    est, sig = ratio.mean * volK, ratio.stderr * volK
    factor = 1.0 if lower.degenerate else (-math.expm1(lower.log_correction)
                                           if lower.log_correction < 0 else 0.0)
    sig_low = math.hypot(sig, max(factor, 0.0) * fb.stderr)
    sig_up = math.hypot(sig, abs(1 - N * sup_q) * fb.stderr)
    report = BoundsReport(lower.clamped, upper, volA, inf_q, sup_q, volK - volA, N, n,
                          clamped=lower.clamped != lower.raw, lower_raw=lower.raw)
    if len(probes) < min_depth_probes and lower.clamped > 0:
        verdict = "INCONCLUSIVE"
    elif lower.clamped - 3 * sig_low <= est <= upper + 3 * sig_up:
        verdict = "PASS"
    else:
        verdict = "FAIL"
    return SandwichResult(report, ratio, est, sig, sig_low, sig_up, verdict, fb.stderr,
                          sup_measured, len(probes))


# --------------------------------------------------------------------------
# Groemer comparison
# --------------------------------------------------------------------------

@dataclass
class HullVolumeStats:
    label: str
    mean: float
    stderr: float
    replications: int


@dataclass
class GroemerReport:
    n: int
    N: int
    body: HullVolumeStats
    ball: HullVolumeStats
    sigma: float
    ordered: bool

    @property
    def difference(self) -> float:
        return self.body.mean - self.ball.mean


def _points_in(label, n, N, rng):
    if label == "cube":
        return rng.uniform(-1.0, 1.0, (N, n))
    radius = (2.0 ** n / ball_volume(n)) ** (1.0 / n)
    g = rng.standard_normal((N, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.uniform(0, 1, N) ** (1.0 / n))[:, None]


def expected_hull_volume(label: str, n: int, N: int, R: int, seed: SeedSpec) -> HullVolumeStats:
    """Mean exact hull volume of N uniform points in the cube [-1,1]^n or the equal-volume ball."""
    vols = np.empty(R)
    for r in range(R):
        pts = _points_in(label, n, N, rng_stream(seed.child(r)))
        vols[r] = hull_area_2d(pts) if n == 2 else hull_volume(build_hull(pts))
    se = float(np.std(vols, ddof=1) / math.sqrt(R)) if R > 1 else math.inf
    return HullVolumeStats(label, float(vols.mean()), se, R)


def run_groemer_compare(n: int, N: int, R: int, M: int = 0, seed: SeedSpec = SeedSpec(0),
                        body: str = "cube") -> GroemerReport:
    """E|hull| for the cube against the ball of equal volume.

    Volumes are exact per replication, so ``M`` probes are not needed and
    only recorded.  ``body="ball"`` compares the ball with itself on the
    same streams (difference exactly 0).
    """
    if n not in (2, 3):
        raise ValueError("the comparison is implemented for n in {2, 3}")
    if N <= n:
        raise ValueError("need N > n")
    a = expected_hull_volume(body, n, N, R, seed.child(0))
    b = expected_hull_volume("ball", n, N, R, seed.child(0 if body == "ball" else 1))
    sigma = math.hypot(a.stderr, b.stderr)
    return GroemerReport(n, N, a, b, sigma, b.mean <= a.mean + 3 * sigma)


def report_dict(obj) -> dict:
    """JSON-friendly view of a result dataclass (arrays and specs flattened)."""
    def clean(v):
        if isinstance(v, np.ndarray):
            return v.tolist()
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        if isinstance(v, DistributionSpec):
            return v.to_text().strip().replace("\n", ";")
        if isinstance(v, SeedSpec):
            return asdict(v)
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v
    return clean({k: getattr(obj, k) for k in obj.__dataclass_fields__})


def spec_from_args(kind: str, dim: int, beta=None, isotropic=False) -> DistributionSpec:
    fields = {"kind": kind, "dim": str(dim), "isotropic": "yes" if isotropic else "no"}
    if beta is not None:
        fields["beta"] = str(beta)
    return spec_from_fields(fields)
