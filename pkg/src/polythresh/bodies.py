"""L_alpha-centroid bodies and their comparison with Cramer level sets.

Z_alpha(X) has support function h(theta) = (E|<X, theta>|^alpha)^(1/alpha).
Only circumscribed polytopes are built, so every volume here over-estimates
|Z_alpha|.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import SeedSpec, rng_stream
from .depth import ConvergenceWarning, _rate_radial, cramer_rate, direction_battery
from .projections import projection_abs_moment
from .samplers import RADIAL_KINDS, DistributionSpec, isotropize, radial_nu


def centroid_support(spec: DistributionSpec, alpha: float, theta, with_stderr: bool = False):
    """Support function of Z_alpha at ``theta``."""
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    m, se = projection_abs_moment(spec, theta, alpha)
    h = m ** (1.0 / alpha)
    if not with_stderr:
        return h
    # delta method for m -> m^(1/alpha)
    return h, (h / (alpha * m) * se if m > 0 else 0.0)


def centroid_support_many(spec: DistributionSpec, alpha: float, thetas) -> np.ndarray:
    thetas = np.atleast_2d(thetas)
    if spec.kind in RADIAL_KINDS:
        # rotation invariant: h(theta) = h(e_1) |theta|
        return centroid_support(spec, alpha, np.eye(spec.dim)[0]) * np.linalg.norm(thetas, axis=1)
    return np.array([centroid_support(spec, alpha, th) for th in thetas])


@dataclass
class CentroidBodyApprox:
    alpha: float
    directions: np.ndarray
    support_values: np.ndarray
    outer_volume: float
    stderr: float
    spec: DistributionSpec = field(repr=False, default=None)
    in_regime: bool = True

    @property
    def support_samples(self):
        return list(zip(self.directions, self.support_values))

    def contains(self, X, tol: float = 0.0) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all(X @ self.directions.T <= self.support_values + tol, axis=1)


def _with_axes(dim, directions):
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    return axes if directions is None else np.vstack([axes, directions])


def centroid_outer_volume(spec: DistributionSpec, alpha: float, directions=None, M: int | None = None,
                          probes: int = 200_000, seed: SeedSpec | None = None) -> CentroidBodyApprox:
    """Volume of the polytope {x : <x, theta_j> <= h(theta_j)} by MC in its bounding box.

    Pass explicit ``directions`` or a count ``M`` of battery directions; the
    2n coordinate directions are always included since they give the box.
    """
    n = spec.dim
    if directions is None and M is not None:
        directions = direction_battery(n, M, seed)
    D = _with_axes(n, None if directions is None else np.asarray(directions, dtype=float))
    D = D / np.linalg.norm(D, axis=1, keepdims=True)
    h = centroid_support_many(spec, alpha, D)
    hi, lo = h[:n], -h[n:2 * n]
    box = float(np.prod(hi - lo))
    rng = rng_stream(seed or SeedSpec(0xC3B0, n))
    hits = 0
    chunk = max(1, 2_000_000 // len(D))
    for start in range(0, probes, chunk):
        k = min(chunk, probes - start)
        Y = lo + (hi - lo) * rng.uniform(0.0, 1.0, (k, n))
        hits += int(np.count_nonzero(np.all(Y @ D.T <= h, axis=1)))
    p = hits / probes
    return CentroidBodyApprox(alpha, D, h, p * box, box * math.sqrt(p * (1 - p) / probes), spec,
                              in_regime=2 <= alpha <= n)


def paouris_ratio(spec: DistributionSpec, alpha: float, M: int = 512, probes: int = 200_000,
                  seed: SeedSpec | None = None) -> float:
    """|Z_alpha|^(1/n) / sqrt(alpha / n) for the isotropic position of ``spec``.

    The outer-volume estimate over-states |Z_alpha|, so this over-states the
    ratio as well.
    """
    iso = isotropize(spec)
    n = iso.dim
    approx = centroid_outer_volume(iso, alpha, M=M, probes=probes, seed=seed)
    return approx.outer_volume ** (1.0 / n) / math.sqrt(alpha / n)


# --------------------------------------------------------------------------
# inclusion checks between {Lambda* < alpha} and Z_alpha
# --------------------------------------------------------------------------

@dataclass
class InclusionReport:
    alpha: float
    trials: int
    violations: int
    max_ratio: float
    direction: str
    points: np.ndarray = field(repr=False, default=None)


def _boundary_distance(spec, X, U):
    """Largest t with X + t U still in the closed support hull (per row)."""
    s = spec.isotropic_scale
    if spec.kind in RADIAL_KINDS:
        b = np.einsum("ij,ij->i", X, U)
        c = np.einsum("ij,ij->i", X, X) - s * s
        return -b + np.sqrt(np.maximum(b * b - c, 0.0))
    with np.errstate(divide="ignore"):
        t = np.where(U > 0, (s - X) / U, np.where(U < 0, (-s - X) / U, np.inf))
    return t.min(axis=1)


def _chord_end(spec, X, U, alpha, iters=45):
    """Distance from X along U to the boundary of {Lambda* < alpha} (bisection)."""
    edge = _boundary_distance(spec, X, U)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        whole = cramer_rate(spec, X + edge[:, None] * U) < alpha
        lo, hi = np.zeros(len(X)), edge.copy()
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            ok = cramer_rate(spec, X + mid[:, None] * U) < alpha
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
    return np.where(whole, edge, lo)


def sample_rate_level_set(spec: DistributionSpec, alpha: float, count: int,
                          seed: SeedSpec | None = None, burn_in: int | None = None) -> np.ndarray:
    """Approximately uniform points of the convex set {Lambda* < alpha}.

    Radial laws have a ball as level set and are sampled exactly; the others
    run ``count`` independent hit-and-run chains from the origin.
    """
    n = spec.dim
    rng = rng_stream(seed or SeedSpec(0x4A11, n))
    if spec.kind in RADIAL_KINDS:
        lo, hi = 0.0, 1.0
        nu = radial_nu(spec)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _rate_radial(np.array([mid]), nu)[0][0] < alpha:
                lo = mid
            else:
                hi = mid
        radius = lo * spec.isotropic_scale
        g = rng.standard_normal((count, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g * (radius * rng.uniform(0, 1, count) ** (1 / n))[:, None]
    if burn_in is None:
        burn_in = 10 * n * n
    X = np.zeros((count, n))
    for _ in range(burn_in):
        U = rng.standard_normal((count, n))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        t_plus = _chord_end(spec, X, U, alpha)
        t_minus = _chord_end(spec, X, -U, alpha)
        X = X + (rng.uniform(0, 1, count) * (t_plus + t_minus) - t_minus)[:, None] * U
    return X


def inclusion_check_LqZ(spec: DistributionSpec, alpha: float, trials: int = 1000,
                        directions: int = 512, seed: SeedSpec | None = None) -> InclusionReport:
    """Check {Lambda* < alpha} inside 4e Z_alpha on sampled points.

    ``max_ratio`` is the largest <x, theta> / (4e h(theta)) seen; a value
    above 1 is a violation.
    """
    if alpha < 2:
        raise ValueError("the inclusion is stated for alpha >= 2")
    X = sample_rate_level_set(spec, alpha, trials, seed)
    rates = cramer_rate(spec, X)
    if np.any(~(rates < alpha)):
        raise RuntimeError("level-set sampler left {Lambda* < alpha}")
    D = _with_axes(spec.dim, direction_battery(spec.dim, directions, seed))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    h = centroid_support_many(spec, alpha, D)
    ratio = (X @ D.T) / (4 * math.e * h)
    per_point = ratio.max(axis=1)
    return InclusionReport(alpha, trials, int(np.count_nonzero(per_point > 1)),
                           float(max(per_point.max(), 0.0)), "forward", X)


def centroid_boundary_points(spec: DistributionSpec, alpha: float, count: int,
                             directions: int = 2048, seed: SeedSpec | None = None) -> np.ndarray:
    """Points on (or just outside) the boundary of Z_alpha along random rays.

    The gauge along a ray u is max_theta <u, theta> / h(theta) over a finite
    battery, which under-states it, so the points never fall inside Z_alpha
    by more than the battery's resolution.
    """
    n = spec.dim
    rng = rng_stream(seed or SeedSpec(0xB0D1, n))
    D = _with_axes(n, direction_battery(n, directions, seed))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    h = centroid_support_many(spec, alpha, D)
    U = rng.standard_normal((count, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    gauge = np.max((U @ D.T) / h, axis=1)
    return U / gauge[:, None]


def reverse_inclusion_check(spec: DistributionSpec, alpha: float, trials: int = 1000,
                            directions: int = 2048, seed: SeedSpec | None = None) -> InclusionReport:
    """Check Z_alpha inside 2^(1/alpha) e {Lambda* < alpha} at boundary points of Z_alpha.

    ``max_ratio`` is the largest Lambda*(x / (2^(1/alpha) e)) / alpha seen.
    """
    B = centroid_boundary_points(spec, alpha, trials, directions, seed)
    scaled = B / (2 ** (1 / alpha) * math.e)
    rates = cramer_rate(spec, scaled)
    return InclusionReport(alpha, trials, int(np.count_nonzero(~(rates < alpha))),
                           float(np.max(rates) / alpha), "reverse", scaled)

