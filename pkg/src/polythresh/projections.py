"""Exact laws of one-dimensional projections <X, theta>.

Radial families reduce to the first marginal (a symmetric beta law).  For
the solid cube the projection is a weighted sum of independent uniforms,
and for any f with k-th antiderivative F_k

    E f(sum a_i V_i) = (prod 2 a_i)^-1 * sum_eps (prod eps_i) F_k(sum eps_i a_i),

V_i uniform on [-1, 1].  The alternating sum cancels badly when the a_i
differ in scale, so it is evaluated in extended precision.  The cube
vertices are enumerated.  Anything else falls back to Monte Carlo.
"""
from __future__ import annotations

import itertools
import math

import mpmath as mp
import numpy as np
from scipy import special

from .core import SeedSpec, rng_stream
from .samplers import RADIAL_KINDS, DistributionSpec, draw, radial_nu, radial_tail

MC_DRAWS = 1_000_000
MAX_EXACT_BOX = 12
MAX_EXACT_VERTICES = 20
_DROP = 1e-13


def _weights(spec: DistributionSpec, theta) -> np.ndarray:
    a = np.abs(np.asarray(theta, dtype=float)) * spec.isotropic_scale
    if a.max() == 0:
        return a[:0]
    return np.sort(a[a > _DROP * a.max()])[::-1]


def _alternating_box_sum(a: np.ndarray, antiderivative) -> float:
    k = len(a)
    lost = sum(math.log10(a[0] / x) for x in a) + 2 * k
    with mp.workdps(30 + int(lost)):
        am = [mp.mpf(float(x)) for x in a]
        total = mp.mpf(0)
        for signs in itertools.product((1, -1), repeat=k):
            s = mp.fsum(e * x for e, x in zip(signs, am))
            total += (-1) ** signs.count(-1) * antiderivative(s, k)
        return float(total / mp.fprod(2 * x for x in am))


def _vertex_atoms(spec, theta):
    a = np.asarray(theta, dtype=float) * spec.isotropic_scale
    signs = 1.0 - 2.0 * ((np.arange(2 ** len(a))[:, None] >> np.arange(len(a))) & 1)
    return signs @ a


def _mc_projection(spec, theta, draws=MC_DRAWS):
    rng = rng_stream(SeedSpec(0x5EED, 0))
    out = np.empty(draws)
    chunk = 200_000
    th = np.asarray(theta, dtype=float)
    for start in range(0, draws, chunk):
        stop = min(draws, start + chunk)
        out[start:stop] = draw(spec, stop - start, rng) @ th
    return out


def exact_available(spec: DistributionSpec) -> bool:
    if spec.kind in RADIAL_KINDS:
        return True
    if spec.kind == "cube_solid":
        return spec.dim <= MAX_EXACT_BOX
    if spec.kind == "cube_vertices":
        return spec.dim <= MAX_EXACT_VERTICES
    return False


def projection_tail(spec: DistributionSpec, theta, a: float, strict: bool = True):
    """(P(<X, theta> > a), stderr); use ``strict=False`` for >= (matters only for atoms)."""
    theta = np.asarray(theta, dtype=float)
    if spec.kind in RADIAL_KINDS:
        r = float(np.linalg.norm(theta))
        p = radial_tail(spec, a / r)
        if not strict and spec.kind == "sphere" and spec.dim == 1 and abs(abs(a / r) - spec.isotropic_scale) < 1e-15:
            p += 0.5
        return float(p), 0.0
    if spec.kind == "cube_solid" and spec.dim <= MAX_EXACT_BOX:
        w = _weights(spec, theta)
        if a >= w.sum():
            return 0.0, 0.0
        if a <= -w.sum():
            return 1.0, 0.0
        p = _alternating_box_sum(w, lambda s, k: max(s - a, 0) ** k / math.factorial(k))
        return min(1.0, max(0.0, p)), 0.0
    if spec.kind == "cube_vertices" and spec.dim <= MAX_EXACT_VERTICES:
        atoms = _vertex_atoms(spec, theta)
        tol = 1e-12 * (np.abs(atoms).max() or 1.0)
        hit = atoms > a + tol if strict else atoms >= a - tol
        return float(hit.mean()), 0.0
    proj = _mc_projection(spec, theta)
    p = float(np.mean(proj > a) if strict else np.mean(proj >= a))
    return p, math.sqrt(max(p * (1 - p), 1.0 / len(proj)) / len(proj))


def projection_upper_quantile(spec: DistributionSpec, theta, delta: float, xtol: float = 1e-10) -> float:
    """sup{t : P(<X, theta> >= t) >= delta}, the floating-body offset for direction theta."""
    theta = np.asarray(theta, dtype=float)
    if spec.kind in RADIAL_KINDS and not (spec.kind == "sphere" and spec.dim == 1):
        nu = radial_nu(spec)
        if delta >= 1:
            return -float(np.linalg.norm(theta)) * spec.isotropic_scale
        u2 = special.betainccinv(0.5, nu + 0.5, min(1.0, 2 * delta)) if delta <= 0.5 else \
            special.betainccinv(0.5, nu + 0.5, min(1.0, 2 * (1 - delta)))
        t = math.sqrt(u2) * spec.isotropic_scale * float(np.linalg.norm(theta))
        return t if delta <= 0.5 else -t
    if spec.kind == "cube_vertices" and spec.dim <= MAX_EXACT_VERTICES or \
            (spec.kind == "sphere" and spec.dim == 1):
        if spec.kind == "sphere":
            atoms = np.array([-1.0, 1.0]) * theta[0] * spec.isotropic_scale
        else:
            atoms = _vertex_atoms(spec, theta)
        atoms = np.sort(atoms)
        # P(>= atoms[i]) = (len - i) / len, so take the last atom with mass >= delta
        i = int(math.floor(len(atoms) * (1 - delta) + 1e-12))
        return float(atoms[min(i, len(atoms) - 1)])
    if spec.kind == "cube_solid" and spec.dim <= MAX_EXACT_BOX:
        hi = float(_weights(spec, theta).sum())
        lo = -hi
        while hi - lo > xtol * max(1.0, abs(hi)):
            mid = 0.5 * (lo + hi)
            if projection_tail(spec, theta, mid)[0] >= delta:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    proj = _mc_projection(spec, theta)
    return float(np.quantile(proj, 1 - delta))


def projection_abs_moment(spec: DistributionSpec, theta, alpha: float):
    """(E|<X, theta>|^alpha, stderr)."""
    theta = np.asarray(theta, dtype=float)
    if spec.kind in RADIAL_KINDS:
        r = float(np.linalg.norm(theta)) * spec.isotropic_scale
        nu = radial_nu(spec)
        # |X_1|^2 ~ Beta(1/2, nu + 1/2)
        log_m = (special.gammaln((alpha + 1) / 2) + special.gammaln(nu + 1)
                 - special.gammaln(0.5) - special.gammaln(nu + 1 + alpha / 2))
        return float(np.exp(log_m) * r ** alpha), 0.0
    if spec.kind == "cube_solid" and spec.dim <= MAX_EXACT_BOX:
        w = _weights(spec, theta)
        if len(w) == 0:
            return 0.0, 0.0
        am = mp.mpf(alpha)

        def anti(s, k):
            if s == 0:
                return mp.mpf(0)
            return mp.sign(s) ** k * abs(s) ** (am + k) / mp.rf(am + 1, k)

        return _alternating_box_sum(w, anti), 0.0
    if spec.kind == "cube_vertices" and spec.dim <= MAX_EXACT_VERTICES:
        return float(np.mean(np.abs(_vertex_atoms(spec, theta)) ** alpha)), 0.0
    vals = np.abs(_mc_projection(spec, theta)) ** alpha
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))
