"""Tukey half-space depth, floating bodies and the Cramer-transform bound.

The depth of x is the smallest mass of a closed half-space whose boundary
passes through x.  For a finite sample every finite set of directions gives
an upper bound, which is what ``depth_empirical`` returns.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize, special

from .core import Polygon2D, SeedSpec, halfplane_polygon_measure, rng_stream
from .projections import projection_tail, projection_upper_quantile
from .samplers import (BOX_KINDS, RADIAL_KINDS, DistributionSpec, SampleSet, _product_grid,
                       draw_reference_uniform, radial_nu)


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass
class DepthReport:
    point: np.ndarray
    estimate: float
    directions_tried: int
    refinement_steps: int
    mode: str
    best_direction: Optional[np.ndarray] = None


def unit_directions(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def direction_battery(dim: int, count: int, seed: SeedSpec | None = None) -> np.ndarray:
    """Evenly spaced unit vectors in the plane, seeded random ones otherwise."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    return unit_directions(dim, count, rng_stream(seed or SeedSpec(0xD1CE, dim)))


# --------------------------------------------------------------------------
# sample depth
# --------------------------------------------------------------------------

class EmpiricalDepth:
    """Depth estimator for one sample, reusable across many query points.

    The random share of the budget uses one fixed battery of directions.
    Projections are sorted a block of directions at a time, so the random
    phase costs a binary search per direction and query, and memory stays at
    one block.  The rest of the budget is spent on coordinate-perturbation
    descent around the best direction found so far.
    """

    RANDOM_SHARE = 0.7
    BLOCK_FLOATS = 8_000_000

    def __init__(self, sample, budget: int = 2048, seed: SeedSpec | None = None):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.points = sample.points if isinstance(sample, SampleSet) else np.asarray(sample, float)
        m, n = self.points.shape
        self.budget = budget
        self.n_random = max(1, int(round(self.RANDOM_SHARE * budget)))
        self.n_refine = budget - self.n_random
        self.rng = rng_stream(seed or SeedSpec(0xDE9, 0))
        self.directions = unit_directions(n, self.n_random, self.rng)
        self._block = max(1, self.BLOCK_FLOATS // m)
        self._sorted = None
        if self.n_random <= self._block:
            self._sorted = np.sort(self.points @ self.directions.T, axis=0)

    def _counts(self, x, dirs):
        """#{i : <X_i - x, theta> >= 0} for each row theta of dirs."""
        return np.count_nonzero(self.points @ dirs.T >= x @ dirs.T, axis=0)

    def _random_phase(self, X):
        """(best count, best direction index) over the random battery, per query row."""
        m = len(self.points)
        best = np.full(len(X), m + 1)
        arg = np.zeros(len(X), dtype=int)
        for start in range(0, self.n_random, self._block):
            stop = min(self.n_random, start + self._block)
            if self._sorted is not None:
                proj = self._sorted[:, start:stop]
            else:
                proj = np.sort(self.points @ self.directions[start:stop].T, axis=0)
            level = X @ self.directions[start:stop].T
            counts = m - np.column_stack([np.searchsorted(proj[:, j], level[:, j], side="left")
                                          for j in range(stop - start)])
            j = np.argmin(counts, axis=1)
            c = counts[np.arange(len(X)), j]
            better = c < best
            best[better], arg[better] = c[better], start + j[better]
        return best, arg

    def _refine(self, x, best_count, theta):
        n = len(x)
        tried, steps, step = self.n_random, 0, 0.25
        while tried < self.budget and best_count > 0:
            k = min(2 * n + 2, self.budget - tried)
            cand = np.vstack([theta + step * np.eye(n), theta - step * np.eye(n),
                              theta + step * self.rng.standard_normal((2, n))])[:k]
            cand /= np.linalg.norm(cand, axis=1, keepdims=True)
            c = self._counts(x, cand)
            tried += k
            steps += 1
            j = int(np.argmin(c))
            if c[j] < best_count:
                best_count, theta = int(c[j]), cand[j]
            elif c[j] == best_count:
                theta = cand[j]  # drift along plateaus
                step *= 0.8
            else:
                step *= 0.5
            step = max(step, 1e-6)
        return DepthReport(x, best_count / len(self.points), tried, steps, "empirical", theta)

    def query_many(self, X) -> list:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        best, arg = self._random_phase(X)
        return [self._refine(x, int(b), self.directions[a].copy()) for x, b, a in zip(X, best, arg)]

    def query(self, x) -> DepthReport:
        return self.query_many(np.asarray(x, dtype=float)[None, :])[0]


def depth_empirical(x, sample, budget: int = 2048, seed: SeedSpec | None = None) -> DepthReport:
    """Upper estimate of the sample depth of ``x`` from ``budget`` directions."""
    return EmpiricalDepth(sample, budget, seed).query(x)


def depth_exact_2d_sample(x, sample) -> DepthReport:
    """Exact planar sample depth by an angular sweep around ``x``."""
    P = sample.points if isinstance(sample, SampleSet) else np.asarray(sample, float)
    if P.shape[1] != 2:
        raise ValueError("depth_exact_2d_sample needs planar points")
    x = np.asarray(x, dtype=float)
    m = len(P)
    rel = P - x
    coincident = np.all(np.abs(rel) <= 1e-14 * (1.0 + np.abs(P)), axis=1)
    ang = np.sort(np.mod(np.arctan2(rel[~coincident, 1], rel[~coincident, 0]), 2 * np.pi))
    k = len(ang)
    if k == 0:
        return DepthReport(x, 1.0, 0, 0, "exact2d_sample")
    # an optimal open half-plane starts just after some point's angle phi_j and
    # then holds every angle in (phi_j, phi_j + pi]
    ext = np.concatenate([ang, ang + 2 * np.pi])
    lo = np.searchsorted(ext, ang, side="right")
    hi = np.searchsorted(ext, ang + np.pi, side="right")
    count = int(np.min(hi - lo))
    return DepthReport(x, (count + int(coincident.sum())) / m, k, 0, "exact2d_sample")


# --------------------------------------------------------------------------
# continuous laws
# --------------------------------------------------------------------------

def _golden_min(f, a, b, tol=1e-10, max_iter=200):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def depth_exact_2d_uniform(x, body: Polygon2D, grid: int = 256, starts: int = 6) -> float:
    """Depth of ``x`` for the uniform law on a convex polygon."""
    x = np.asarray(x, dtype=float)
    if not body.contains(x):
        return 0.0
    area = float(body.area)

    def mass(phi):
        d = (math.cos(phi), math.sin(phi))
        # mass of {<y - x, d> >= 0} = 1 - mass of {<y, d> <= <x, d>}
        return 1.0 - float(halfplane_polygon_measure(body, d, d[0] * x[0] + d[1] * x[1])) / area

    phis = 2 * np.pi * np.arange(grid) / grid
    vals = np.array([mass(p) for p in phis])
    best = float(vals.min())
    h = 2 * np.pi / grid
    local = [i for i in range(grid) if vals[i] <= vals[i - 1] and vals[i] <= vals[(i + 1) % grid]]
    local.sort(key=lambda i: vals[i])
    for i in local[:starts]:
        _, v = _golden_min(mass, phis[i] - h, phis[i] + h)
        best = min(best, v)
    return max(0.0, best)


def directional_tail(spec: DistributionSpec, theta, a: float, with_stderr: bool = False):
    """P(<X, theta> > a); exact for radial and cube kinds, MC otherwise."""
    p, se = projection_tail(spec, theta, a)
    return (p, se) if with_stderr else p


def depth_continuous(spec: DistributionSpec, x, budget: int = 256,
                     seed: SeedSpec | None = None) -> DepthReport:
    """Depth of ``x`` under the law itself, min over directions of exact tails.

    Exact for radial kinds (the optimal direction is x / |x|); an upper
    estimate otherwise.
    """
    x = np.asarray(x, dtype=float)
    n = spec.dim
    if spec.kind in RADIAL_KINDS:
        r = float(np.linalg.norm(x))
        theta = x / r if r > 0 else np.eye(n)[0]
        return DepthReport(x, projection_tail(spec, theta, r, strict=False)[0], 1, 0,
                           "analytic", theta)
    dirs = direction_battery(n, max(2 * n, int(0.7 * budget)), seed)
    if spec.kind in BOX_KINDS:
        # the worst direction points the same way as x, so seed with sign(x)
        dirs = np.vstack([dirs, np.sign(x) + (x == 0), x / (np.linalg.norm(x) or 1.0)])
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    def q(th):
        return projection_tail(spec, th, float(x @ th), strict=False)[0]

    vals = np.array([q(th) for th in dirs])
    tried = len(dirs)
    j = int(np.argmin(vals))
    theta, best, step, steps = dirs[j], float(vals[j]), 0.2, 0
    while tried < budget and step > 1e-7:
        improved = False
        for e in np.vstack([np.eye(n), -np.eye(n)]):
            cand = theta + step * e
            cand /= np.linalg.norm(cand)
            v = q(cand)
            tried += 1
            if v < best:
                theta, best, improved = cand, v, True
        steps += 1
        if not improved:
            step *= 0.5
    return DepthReport(x, best, tried, steps, "analytic", theta)


def kappa_depth_lower_bound(norm_K: float, kappa: float) -> float:
    """Depth lower bound kappa/16 * (1 - |x|_K)^(1/kappa) for kappa-concave laws."""
    if not 0 < kappa < 1:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    if norm_K < 0:
        raise ValueError("norm_K must be nonnegative")
    if norm_K >= 1:
        return 0.0
    return kappa / 16.0 * (1.0 - norm_K) ** (1.0 / kappa)


def tail_lower_bound(a: float, h: float, kappa: float) -> float:
    """kappa/16 * (1 - a/h)^(1/kappa): the tail bound for P(<X, theta> > a)."""
    if a >= h:
        return 0.0
    return kappa / 16.0 * (1.0 - max(a, 0.0) / h) ** (1.0 / kappa)


# --------------------------------------------------------------------------
# Cramer transform
# --------------------------------------------------------------------------

def _log_sinhc(th):
    a = np.abs(np.asarray(th, dtype=float))
    small = a < 1e-4
    safe = np.where(small, 1.0, a)
    big = safe + np.log1p(-np.exp(-2 * safe)) - np.log(2 * safe)
    return np.where(small, a * a / 6 - a ** 4 / 180, big)


def _langevin(th):
    th = np.asarray(th, dtype=float)
    small = np.abs(th) < 1e-4
    safe = np.where(small, 1.0, th)
    return np.where(small, th / 3 - th ** 3 / 45, 1 / np.tanh(safe) - 1 / safe)


def _langevin_prime(th):
    th = np.asarray(th, dtype=float)
    small = np.abs(th) < 1e-3
    safe = np.where(small, 1.0, th)
    big = 1 / safe ** 2 - 1 / np.sinh(np.minimum(np.abs(safe), 350)) ** 2
    return np.where(small, 1 / 3 - th * th / 15, big)


def log_mgf_uniform(th):
    """log E exp(th U), U uniform on [-1, 1]."""
    return _log_sinhc(th)


def log_mgf_sign(th):
    """log E exp(th E), E uniform on {-1, 1}."""
    a = np.abs(np.asarray(th, dtype=float))
    return a + np.log1p(np.exp(-2 * a)) - math.log(2)


def _newton(fun, dfun, target, th0, lo=None, iters=60):
    th = th0.copy()
    for _ in range(iters):
        step = (fun(th) - target) / dfun(th)
        new = th - step
        if lo is not None:
            new = np.where(new <= lo, 0.5 * (th + lo), new)
        if np.all(np.abs(new - th) <= 1e-15 * (1 + np.abs(th))):
            th = new
            break
        th = new
    return th


def _rate_uniform(u):
    """(Lambda*(u), theta*) for U uniform on [-1, 1], |u| < 1."""
    s, a = np.sign(u), np.abs(u)
    th0 = a * (3 - a * a) / (1 - a * a)
    th = _newton(_langevin, _langevin_prime, a, th0, lo=0.0)
    return th * a - _log_sinhc(th), s * th


def _rate_sign(u):
    a = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = 0.5 * ((1 + a) * np.log1p(a) + np.where(a < 1, (1 - a) * np.log1p(-a), 0.0))
        th = np.arctanh(np.minimum(a, 1.0))
    return rate, np.sign(u) * th


_HANKEL_FROM = 1e4


def _log_ive(nu, r):
    """log(I_nu(r) e^-r); Hankel's expansion for large r where ive underflows to nan."""
    r = np.asarray(r, dtype=float)
    big = r > _HANKEL_FROM
    rs = np.where(big, r, 1.0)
    mu = 4.0 * nu * nu
    term, series = np.ones_like(rs), np.ones_like(rs)
    for k in range(1, 6):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8 * rs)
        series = series + term
    with np.errstate(divide="ignore", invalid="ignore"):
        asym = np.log(series) - 0.5 * np.log(2 * np.pi * rs)
        direct = np.log(special.ive(nu, np.where(big, 1.0, r)))
    return np.where(big, asym, direct)


def _log_mgf_radial(r, nu):
    """log E exp(r X_1) for a symmetric beta marginal of index nu."""
    r = np.asarray(r, dtype=float)
    small = r < 1e-6
    safe = np.where(small, 1.0, r)
    big = special.gammaln(nu + 1) + nu * np.log(2 / safe) + _log_ive(nu, safe) + safe
    return np.where(small, r * r / (2 * (2 * nu + 2)), big)


def _radial_ratio(r, nu):
    return np.exp(_log_ive(nu + 1, r) - _log_ive(nu, r))


def _rate_radial(u, nu):
    """(Lambda*(u), r*) along a ray; u in [0, 1)."""
    u = np.asarray(u, dtype=float)
    out_rate = np.where(u < 1e-8, (nu + 1) * u * u, 0.0)
    out_r = np.where(u < 1e-8, (2 * nu + 2) * u, 0.0)
    for i in np.flatnonzero(u >= 1e-8):
        target = float(u[i])
        hi = max(1.0, (2 * nu + 2) * target / (1 - target * target))
        while _radial_ratio(hi, nu) < target:
            hi *= 2
        lo = 0.5 * target
        while _radial_ratio(lo, nu) >= target:
            lo *= 0.5
        r = optimize.brentq(lambda t: _radial_ratio(t, nu) - target, lo, hi,
                            xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
        out_r[i] = r
        out_rate[i] = r * target - float(_log_mgf_radial(r, nu))
    return out_rate, out_r


def _rate_product(u, spec):
    grid, dens = _product_grid(spec)

    def mean_tilted(th):
        w = np.exp(th * grid - abs(th)) * dens
        return float(np.trapezoid(grid * w, grid) / np.trapezoid(w, grid))

    def log_mgf(th):
        w = np.exp(th * grid - abs(th)) * dens
        return float(np.log(np.trapezoid(w, grid)) + abs(th))

    rates, thetas = np.zeros_like(u), np.zeros_like(u)
    for i, target in enumerate(u):
        if target == 0:
            continue
        bound = 1.0
        while abs(mean_tilted(math.copysign(bound, target))) < abs(target) and bound < 1e6:
            bound *= 2
        lo, hi = sorted((0.0, math.copysign(bound, target)))
        th = optimize.brentq(lambda t: mean_tilted(t) - target, lo, hi, xtol=1e-13)
        thetas[i] = th
        rates[i] = th * target - log_mgf(th)
    return rates, thetas


BOUNDARY_MARGIN = 1e-12


def cramer_rate(spec: DistributionSpec, x, return_theta: bool = False):
    """Legendre transform of the log-MGF of ``spec`` at ``x`` (rows vectorised).

    Points outside the closed support hull give +inf.  Points on its boundary
    are pulled inside by ``BOUNDARY_MARGIN`` and reported with a
    ``ConvergenceWarning`` unless the transform is finite there.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    s = spec.isotropic_scale
    U = X / s
    single = np.ndim(x) == 1
    if spec.kind in RADIAL_KINDS:
        u = np.linalg.norm(U, axis=1)
        outside = u > 1 + 1e-15
        boundary = (u >= 1 - BOUNDARY_MARGIN) & ~outside
        if np.any(boundary):
            warnings.warn("point on the support boundary; rate is a large finite value",
                          ConvergenceWarning, stacklevel=2)
        rate, r = _rate_radial(np.minimum(u, 1 - BOUNDARY_MARGIN), radial_nu(spec))
        with np.errstate(invalid="ignore", divide="ignore"):
            theta = np.where(u[:, None] > 0, U / u[:, None], 0.0) * r[:, None] / s
    else:
        outside = np.any(np.abs(U) > 1 + 1e-15, axis=1)
        boundary = np.any(np.abs(U) >= 1 - BOUNDARY_MARGIN, axis=1) & ~outside
        if spec.kind == "cube_vertices":
            rate_c, th_c = _rate_sign(np.clip(U, -1, 1))
        else:
            if np.any(boundary):
                warnings.warn("point on the support boundary; rate is a large finite value",
                              ConvergenceWarning, stacklevel=2)
            Uc = np.clip(U, -1 + BOUNDARY_MARGIN, 1 - BOUNDARY_MARGIN)
            if spec.kind == "cube_solid":
                rate_c, th_c = _rate_uniform(Uc)
            else:
                pairs = [_rate_product(col, spec) for col in Uc.T]
                rate_c = np.column_stack([p[0] for p in pairs])
                th_c = np.column_stack([p[1] for p in pairs])
        rate = rate_c.sum(axis=1)
        theta = th_c / s
    rate = np.where(outside, np.inf, rate)
    if single:
        rate, theta = float(rate[0]), theta[0]
    return (rate, theta) if return_theta else rate


def log_mgf(spec: DistributionSpec, theta):
    """Lambda(theta) = log E exp(<theta, X>), rows vectorised."""
    T = np.atleast_2d(np.asarray(theta, dtype=float)) * spec.isotropic_scale
    if spec.kind in RADIAL_KINDS:
        out = _log_mgf_radial(np.linalg.norm(T, axis=1), radial_nu(spec))
    elif spec.kind == "cube_solid":
        out = log_mgf_uniform(T).sum(axis=1)
    elif spec.kind == "cube_vertices":
        out = log_mgf_sign(T).sum(axis=1)
    else:
        grid, dens = _product_grid(spec)
        out = np.array([sum(float(np.log(np.trapezoid(np.exp(t * grid) * dens, grid))) for t in row)
                        for row in T])
    return float(out[0]) if np.ndim(theta) == 1 else out


# --------------------------------------------------------------------------
# floating bodies
# --------------------------------------------------------------------------

@dataclass
class FloatingBodyApprox:
    delta: float
    directions: np.ndarray
    offsets: np.ndarray
    volume_estimate: float
    stderr: float
    probes: int
    spec: DistributionSpec = field(repr=False, default=None)
    warnings: list = field(default_factory=list)

    @property
    def halfspaces(self):
        return list(zip(self.directions, self.offsets))

    def contains(self, X, tol: float = 0.0) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all(X @ self.directions.T <= self.offsets + tol, axis=1)


def floating_body(spec: DistributionSpec, delta: float, directions, probes: int = 200_000,
                  seed: SeedSpec | None = None) -> FloatingBodyApprox:
    """Outer polyhedral approximation of the floating body {q >= delta}."""
    D = np.asarray(directions, dtype=float)
    D = D / np.linalg.norm(D, axis=1, keepdims=True)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    notes = []
    if delta > 0.5:
        msg = "delta > 1/2: the floating body of a symmetric law has empty interior"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    if len(D) < 2 * spec.dim:
        notes.append(f"only {len(D)} directions (< 2n); the body may be unbounded")
    if spec.kind in RADIAL_KINDS:
        t = projection_upper_quantile(spec, D[0], delta)
        offsets = np.full(len(D), t)
    else:
        offsets = np.array([projection_upper_quantile(spec, th, delta) for th in D])
    rng = rng_stream(seed or SeedSpec(0xF10A7, 0))
    hits, chunk = 0, max(1, 4_000_000 // len(D))
    for start in range(0, probes, chunk):
        Y = draw_reference_uniform(spec, min(chunk, probes - start), rng)
        hits += int(np.count_nonzero(np.all(Y @ D.T <= offsets, axis=1)))
    p = hits / probes
    vol = spec.reference_volume
    return FloatingBodyApprox(delta, D, offsets, p * vol,
                              vol * math.sqrt(p * (1 - p) / probes), probes, spec, notes)


def wet_part_volume(spec: DistributionSpec, delta: float, directions, probes: int = 200_000,
                    seed: SeedSpec | None = None):
    """(|conv support| - floating body volume, stderr)."""
    fb = floating_body(spec, delta, directions, probes, seed)
    return spec.reference_volume - fb.volume_estimate, fb.stderr
