"""Distribution families, their metadata and one-dimensional marginals.

All families are symmetric and coordinate-exchangeable, so the isotropic
transform is a single scale factor applied to every axis.

Families
--------
cube_solid     uniform on [-1, 1]^n
cube_vertices  uniform on {-1, 1}^n
ball           uniform on the Euclidean unit ball (beta with beta = 0)
sphere         uniform on the unit sphere (the beta -> -1 limit)
beta           density proportional to (1 - |x|^2)^beta on the unit ball
product_1d     i.i.d. coordinates with a tabulated symmetric density on [-1, 1]
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import special

from .core import SeedSpec, rng_stream

KINDS = ("cube_solid", "cube_vertices", "ball", "sphere", "beta", "product_1d")
RADIAL_KINDS = ("ball", "sphere", "beta")
BOX_KINDS = ("cube_solid", "cube_vertices", "product_1d")


class SpecError(ValueError):
    """Invalid distribution description."""


def ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def log_ball_volume(n: int) -> float:
    return (n / 2) * math.log(math.pi) - math.lgamma(n / 2 + 1)


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    dim: int
    beta_param: Optional[float] = None
    product_base: Optional[tuple] = None
    kappa: Optional[float] = None
    support_volume: Optional[float] = None
    isotropic_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown kind {self.kind!r}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise SpecError(f"dim must be a positive integer, got {self.dim!r}")
        if self.kind == "beta":
            if self.beta_param is None or not self.beta_param > -1:
                raise SpecError(f"beta kind needs beta_param > -1, got {self.beta_param}")
        if self.kind == "product_1d":
            base = self.product_base
            if base is None or len(base) < 3:
                raise SpecError("product_1d needs a tabulated density with >= 3 values")
            arr = np.asarray(base, dtype=float)
            if np.any(arr < 0) or not np.allclose(arr, arr[::-1]):
                raise SpecError("product_1d density must be nonnegative and symmetric")
        if self.kappa is not None and not 0 < self.kappa <= 1 / self.dim + 1e-15:
            raise SpecError(f"kappa must lie in (0, 1/n], got {self.kappa}")
        if not self.isotropic_scale > 0:
            raise SpecError("isotropic_scale must be positive")

    @property
    def beta(self) -> float:
        """Effective beta exponent for the radial families."""
        if self.kind == "ball":
            return 0.0
        if self.kind == "sphere":
            return -1.0
        return float(self.beta_param)

    @property
    def reference_volume(self) -> float:
        """Volume of conv(support) after the isotropic scale is applied."""
        return self.support_volume * self.isotropic_scale ** self.dim

    def to_text(self) -> str:
        lines = [f"kind={self.kind}", f"dim={self.dim}"]
        if self.beta_param is not None:
            lines.append(f"beta={self.beta_param!r}")
        if self.product_base is not None:
            lines.append("product_base=" + ",".join(repr(float(v)) for v in self.product_base))
        lines.append(f"isotropic={'yes' if self.isotropic_scale != 1.0 else 'no'}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DistributionSpec":
        fields = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        return spec_from_fields(fields)


def spec_from_fields(fields: dict) -> DistributionSpec:
    """Build a spec from flat string fields (``kind``, ``dim``, ``beta``, ...)."""
    try:
        kind = fields["kind"]
        dim = int(fields["dim"])
    except KeyError as exc:
        raise SpecError(f"missing spec field {exc.args[0]!r}") from None
    except ValueError:
        raise SpecError(f"dim must be an integer, got {fields.get('dim')!r}") from None
    beta = float(fields["beta"]) if fields.get("beta") not in (None, "") else None
    base = None
    if fields.get("product_base"):
        base = tuple(float(v) for v in fields["product_base"].split(","))
    spec = make_spec(kind, dim, beta=beta, product_base=base)
    if fields.get("isotropic", "no").lower() in ("yes", "true", "1"):
        spec = isotropize(spec)
    return spec


def make_spec(kind: str, dim: int, beta: float | None = None,
              product_base=None, isotropic: bool = False) -> DistributionSpec:
    """Spec with the known concavity parameter and support volume filled in."""
    if kind not in KINDS:
        raise SpecError(f"unknown kind {kind!r}")
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise SpecError(f"dim must be a positive integer, got {dim!r}")
    kappa = None
    if kind in ("cube_solid", "ball"):
        kappa = 1.0 / dim
    elif kind == "beta":
        if beta is None or not beta > -1:
            raise SpecError(f"beta kind needs beta > -1, got {beta}")
        if beta >= 0:
            kappa = 1.0 / (beta + dim)
    if kind in BOX_KINDS:
        volume = 2.0 ** dim
    else:
        volume = ball_volume(dim)
    if product_base is not None:
        product_base = tuple(float(v) for v in product_base)
    spec = DistributionSpec(kind, int(dim), beta_param=beta if kind == "beta" else None,
                            product_base=product_base, kappa=kappa, support_volume=volume)
    return isotropize(spec) if isotropic else spec


# --------------------------------------------------------------------------
# one-dimensional structure
# --------------------------------------------------------------------------

def radial_nu(spec: DistributionSpec) -> float:
    """Index nu with first-marginal density proportional to (1 - t^2)^(nu - 1/2)."""
    return spec.beta + spec.dim / 2


def _product_grid(spec, size=4097):
    base = np.asarray(spec.product_base, dtype=float)
    t = np.linspace(-1.0, 1.0, size)
    g = np.interp(t, np.linspace(-1.0, 1.0, len(base)), base)
    g = g / np.trapezoid(g, t)
    return t, g


def second_moment_1d(spec: DistributionSpec) -> float:
    """E X_1^2 before the isotropic scale."""
    if spec.kind == "cube_solid":
        return 1.0 / 3.0
    if spec.kind == "cube_vertices":
        return 1.0
    if spec.kind == "product_1d":
        t, g = _product_grid(spec)
        return float(np.trapezoid(t * t * g, t))
    # E|X|^2 = n / (n + 2 beta + 2) for the radial families, split over n axes
    return 1.0 / (spec.dim + 2 * spec.beta + 2)


def isotropize(spec: DistributionSpec) -> DistributionSpec:
    """Return ``spec`` rescaled to identity covariance."""
    return replace(spec, isotropic_scale=1.0 / math.sqrt(second_moment_1d(spec)))


def marginal_density_1d(spec: DistributionSpec, t):
    """Density of <X, e_1> at ``t`` (vectorised); zero off the support."""
    if spec.kind not in ("cube_solid", "ball", "beta", "product_1d"):
        raise SpecError(f"no marginal density for kind {spec.kind!r}")
    s = spec.isotropic_scale
    u = np.asarray(t, dtype=float) / s
    inside = np.abs(u) <= 1.0
    if spec.kind == "cube_solid":
        g = np.where(inside, 0.5, 0.0)
    elif spec.kind == "product_1d":
        grid, dens = _product_grid(spec)
        g = np.where(inside, np.interp(u, grid, dens), 0.0)
    else:
        nu = radial_nu(spec)
        log_norm = -special.betaln(0.5, nu + 0.5)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.exp(log_norm + (nu - 0.5) * np.log1p(-np.minimum(u * u, 1.0)))
        g = np.where(inside, g, 0.0)
    g = g / s
    return float(g) if np.ndim(g) == 0 else g


def radial_tail(spec: DistributionSpec, a):
    """P(<X, theta> > a) for a radial family and any unit theta."""
    s = spec.isotropic_scale
    u = np.asarray(a, dtype=float) / s
    nu = radial_nu(spec)
    if nu <= -0.5:  # n = 1 sphere: the two atoms -1, +1
        p = np.where(u < -1, 1.0, np.where(u < 1, 0.5, 0.0))
    else:
        # X_1^2 ~ Beta(1/2, nu + 1/2)
        half = 0.5 * special.betaincc(0.5, nu + 0.5, np.minimum(u * u, 1.0))
        p = np.where(u >= 0, half, 1.0 - half)
        p = np.where(u >= 1, 0.0, np.where(u <= -1, 1.0, p))
    return float(p) if np.ndim(p) == 0 else p


def support_norm(spec: DistributionSpec, x):
    """Minkowski gauge of the (scaled) support hull; rows of ``x`` are points."""
    u = np.asarray(x, dtype=float) / spec.isotropic_scale
    if spec.kind in BOX_KINDS:
        out = np.max(np.abs(u), axis=-1)
    else:
        out = np.linalg.norm(u, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def support_function(spec: DistributionSpec, theta):
    """h_K(theta) of the scaled support hull."""
    th = np.asarray(theta, dtype=float)
    if spec.kind in BOX_KINDS:
        out = np.sum(np.abs(th), axis=-1)
    else:
        out = np.linalg.norm(th, axis=-1)
    out = out * spec.isotropic_scale
    return float(out) if np.ndim(out) == 0 else out


def isotropic_constant(spec: DistributionSpec) -> float:
    """(sup density)^(1/n) of the isotropised law (continuous kinds only)."""
    iso = isotropize(spec)
    n, s = iso.dim, iso.isotropic_scale
    if spec.kind == "cube_solid":
        log_sup = -n * math.log(2.0)
    elif spec.kind == "product_1d":
        _, g = _product_grid(spec)
        log_sup = n * math.log(float(g.max()))
    elif spec.kind in ("ball", "beta"):
        b = spec.beta
        if b < 0:
            raise SpecError("density is unbounded for beta < 0")
        # normaliser Gamma(n/2 + b + 1) / (pi^(n/2) Gamma(b + 1)), max at the origin
        log_sup = math.lgamma(n / 2 + b + 1) - (n / 2) * math.log(math.pi) - math.lgamma(b + 1)
    else:
        raise SpecError(f"kind {spec.kind!r} has no density")
    return math.exp(log_sup / n - math.log(s))


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSet:
    spec: DistributionSpec
    seed: SeedSpec
    points: np.ndarray

    @property
    def count(self) -> int:
        return self.points.shape[0]


def _unit_vectors(rng, count, dim):
    g = rng.standard_normal((count, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero, but guard the division
    norms[norms == 0] = 1.0
    return g / norms


def draw(spec: DistributionSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Raw draws from ``spec`` using an existing generator."""
    n = spec.dim
    if spec.kind == "cube_solid":
        pts = rng.uniform(-1.0, 1.0, (count, n))
    elif spec.kind == "cube_vertices":
        pts = 2.0 * rng.integers(0, 2, (count, n)).astype(float) - 1.0
    elif spec.kind == "sphere":
        pts = _unit_vectors(rng, count, n)
    elif spec.kind in ("ball", "beta"):
        r = np.sqrt(rng.beta(n / 2, spec.beta + 1.0, count))
        pts = _unit_vectors(rng, count, n) * r[:, None]
    else:
        grid, dens = _product_grid(spec)
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))))
        cdf /= cdf[-1]
        pts = np.interp(rng.uniform(0.0, 1.0, (count, n)), cdf, grid)
    if spec.isotropic_scale != 1.0:
        pts = pts * spec.isotropic_scale
    return pts


def sample(spec: DistributionSpec, count: int, seed: SeedSpec) -> SampleSet:
    """``count`` i.i.d. draws from ``spec`` on the stream named by ``seed``."""
    if count < 1:
        raise SpecError(f"count must be >= 1, got {count}")
    return SampleSet(spec, seed, draw(spec, count, rng_stream(seed)))


def draw_reference_uniform(spec: DistributionSpec, count: int, rng) -> np.ndarray:
    """Uniform draws from conv(support), scaled like ``spec``."""
    n = spec.dim
    if spec.kind in BOX_KINDS:
        pts = rng.uniform(-1.0, 1.0, (count, n))
    else:
        r = rng.uniform(0.0, 1.0, count) ** (1.0 / n)
        pts = _unit_vectors(rng, count, n) * r[:, None]
    return pts * spec.isotropic_scale
