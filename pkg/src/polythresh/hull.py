"""Random polytopes: hull construction, volume, membership and the MC ratio.

``build_hull`` is an incremental beneath-beyond construction for n <= 8.
``membership`` answers y in conv(points) in any dimension with Wolfe's
min-norm-point iteration and returns a certificate either way.
``volume_ratio_mc`` estimates E|K_N| / |conv support| by a two-stage Monte
Carlo: R independent hulls, M uniform probes per hull.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import SeedSpec, convex_hull_2d, rng_stream
from .samplers import DistributionSpec, SampleSet, draw, draw_reference_uniform

MAX_HULL_DIM = 8
INDETERMINATE_LIMIT = 1e-3


class DimensionError(ValueError):
    pass


@dataclass
class HullRep:
    dim: int
    points: np.ndarray
    vertices: np.ndarray
    facets: list
    normals: np.ndarray
    offsets: np.ndarray
    interior: Optional[np.ndarray]
    degenerate: bool = False

    def contains(self, y, tol: float = 1e-9) -> np.ndarray:
        """Closed membership of the rows of ``y`` (facet inequalities)."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if self.degenerate:
            return np.zeros(len(y), dtype=bool)
        return np.all(y @ self.normals.T <= self.offsets + tol, axis=1)

    def neighbors(self) -> list:
        """For each facet, the indices of the facets sharing a ridge with it."""
        ridges: dict = {}
        for f, verts in enumerate(self.facets):
            for k in range(len(verts)):
                ridges.setdefault(verts[:k] + verts[k + 1:], []).append(f)
        adj = [[] for _ in self.facets]
        for owners in ridges.values():
            for a in owners:
                adj[a].extend(b for b in owners if b != a)
        return adj


def _facet_plane(V: np.ndarray, interior: np.ndarray):
    """Unit outward normal and offset of the hyperplane through the rows of V."""
    D = V[1:] - V[0]
    n = V.shape[1]
    # generalised cross product: signed maximal minors of D
    minors = np.array([np.linalg.det(np.delete(D, i, axis=1)) if n > 1 else 1.0
                       for i in range(n)])
    normal = minors * (-1.0) ** np.arange(n)
    length = np.linalg.norm(normal)
    if length == 0:
        return None, None
    normal /= length
    offset = float(normal @ V[0])
    if normal @ interior > offset:
        normal, offset = -normal, -offset
    return normal, offset


def _initial_simplex(P: np.ndarray, eps: float):
    """Greedy choice of n+1 affinely independent points, or None."""
    n = P.shape[1]
    first = int(np.argmax(np.linalg.norm(P - P.mean(axis=0), axis=1)))
    chosen = [first]
    basis = np.zeros((0, n))
    for _ in range(n):
        rel = P - P[first]
        resid = rel - (rel @ basis.T) @ basis
        dist = np.linalg.norm(resid, axis=1)
        nxt = int(np.argmax(dist))
        if dist[nxt] <= eps:
            return None
        basis = np.vstack([basis, resid[nxt] / dist[nxt]])
        chosen.append(nxt)
    return chosen


def _degenerate(P, n):
    return HullRep(n, P, np.zeros(0, dtype=int), [], np.zeros((0, n)), np.zeros(0),
                   None, degenerate=True)


def build_hull(points, eps: float | None = None) -> HullRep:
    """Convex hull of a point set (``SampleSet`` or array) by beneath-beyond.

    Affinely dependent input yields a hull flagged ``degenerate`` with no
    facets and volume zero.
    """
    P = points.points if isinstance(points, SampleSet) else np.asarray(points, dtype=float)
    m, n = P.shape
    if n > MAX_HULL_DIM:
        raise DimensionError(f"exact hulls are limited to dim <= {MAX_HULL_DIM}, got {n}")
    if m < n + 1:
        return _degenerate(P, n)
    scale = float(np.max(np.ptp(P, axis=0))) or 1.0
    if eps is None:
        eps = 1e-10 * scale
    if n == 1:
        lo, hi = int(np.argmin(P[:, 0])), int(np.argmax(P[:, 0]))
        if P[hi, 0] - P[lo, 0] <= eps:
            return _degenerate(P, n)
        return HullRep(1, P, np.array(sorted({lo, hi})), [(lo,), (hi,)],
                       np.array([[-1.0], [1.0]]), np.array([-P[lo, 0], P[hi, 0]]),
                       np.array([0.5 * (P[lo, 0] + P[hi, 0])]))

    simplex = _initial_simplex(P, eps)
    if simplex is None:
        return _degenerate(P, n)
    interior = P[simplex].mean(axis=0)

    facets: list = []
    normals = np.zeros((64, n))
    offsets = np.zeros(64)
    alive = np.zeros(64, dtype=bool)

    def add(verts):
        nonlocal normals, offsets, alive
        normal, offset = _facet_plane(P[list(verts)], interior)
        if normal is None:
            return
        k = len(facets)
        if k == len(offsets):
            normals = np.vstack([normals, np.zeros_like(normals)])
            offsets = np.concatenate([offsets, np.zeros_like(offsets)])
            alive = np.concatenate([alive, np.zeros_like(alive)])
        facets.append(tuple(sorted(verts)))
        normals[k], offsets[k], alive[k] = normal, offset, True

    for drop in range(n + 1):
        add([v for i, v in enumerate(simplex) if i != drop])

    in_simplex = set(simplex)
    for p in range(m):
        if p in in_simplex:
            continue
        k = len(facets)
        dist = normals[:k] @ P[p] - offsets[:k]
        visible = np.flatnonzero(alive[:k] & (dist > eps))
        if len(visible) == 0:
            continue
        ridge_count: dict = {}
        for f in visible:
            verts = facets[f]
            for i in range(n):
                ridge = verts[:i] + verts[i + 1:]
                ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
        alive[visible] = False
        for ridge, count in ridge_count.items():
            if count == 1:
                add(ridge + (p,))

    keep = np.flatnonzero(alive[:len(facets)])
    kept = [facets[i] for i in keep]
    verts = np.array(sorted({v for f in kept for v in f}), dtype=int)
    return HullRep(n, P, verts, kept, normals[keep].copy(), offsets[keep].copy(), interior)


def hull_volume(h: HullRep) -> float:
    """Volume by a fan of simplices from an interior point."""
    if h.degenerate or not h.facets:
        return 0.0
    if h.dim == 1:
        return float(h.offsets.sum())
    V = h.points[np.array(h.facets)] - h.interior  # (F, n, n)
    return float(np.abs(np.linalg.det(V)).sum() / math.factorial(h.dim))


# --------------------------------------------------------------------------
# membership by minimum-norm point
# --------------------------------------------------------------------------

@dataclass
class MembershipResult:
    inside: Optional[bool]
    separator: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    support: Optional[np.ndarray] = None
    distance: float = math.nan
    iterations: int = 0

    @property
    def indeterminate(self) -> bool:
        return self.inside is None


def _affine_min_norm(Q: np.ndarray) -> np.ndarray:
    """Weights mu (sum 1) minimising |Q^T mu| over the affine hull of rows of Q."""
    k = len(Q)
    A = np.empty((k + 1, k + 1))
    A[:k, :k] = Q @ Q.T
    A[:k, k] = 1.0
    A[k, :k] = 1.0
    A[k, k] = 0.0
    b = np.zeros(k + 1)
    b[k] = 1.0
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(A, b, rcond=None)[0]
    return sol[:k]


def min_norm_point(P: np.ndarray, tol: float, max_iter: int | None = None) -> MembershipResult:
    """Wolfe's algorithm on the rows of P; decides whether 0 is within ``tol``.

    Stops as inside once the current iterate has norm <= tol, and as outside
    once a unit direction theta with max_i <p_i, theta> < -tol is found.
    """
    m, n = P.shape
    if max_iter is None:
        max_iter = 50 * (n + 1) + m
    scale2 = float(np.max(np.einsum("ij,ij->i", P, P))) or 1.0
    eps_w = 1e-12
    j = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    S = [j]
    lam = np.array([1.0])
    x = P[j].copy()
    for it in range(1, max_iter + 1):
        xx = float(x @ x)
        norm = math.sqrt(xx)
        if norm <= tol:
            return MembershipResult(True, weights=lam, support=np.array(S), distance=norm,
                                    iterations=it)
        dots = P @ x
        j = int(np.argmin(dots))
        if dots[j] / norm > tol:
            return MembershipResult(False, separator=-x / norm, weights=lam,
                                    support=np.array(S), distance=norm, iterations=it)
        if xx - dots[j] <= 1e-13 * scale2 or j in S:
            # x is (numerically) the min-norm point but neither certificate fired
            return MembershipResult(None, weights=lam, support=np.array(S), distance=norm,
                                    iterations=it)
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            mu = _affine_min_norm(P[S])
            if np.all(mu > eps_w):
                lam = mu
                break
            shrink = (mu <= eps_w) & (lam - mu > 0)
            if not np.any(shrink):
                lam = np.clip(mu, 0.0, None)
                lam /= lam.sum()
                break
            theta = float(np.min(lam[shrink] / (lam[shrink] - mu[shrink])))
            lam = lam + theta * (mu - lam)
            keep = lam > eps_w
            if np.all(keep):
                keep[int(np.argmin(lam))] = False
            S = [s for s, k in zip(S, keep) if k]
            lam = lam[keep]
            lam /= lam.sum()
            if len(S) == 1:
                break
        x = lam @ P[S]
    return MembershipResult(None, weights=lam, support=np.array(S),
                            distance=float(np.linalg.norm(x)), iterations=max_iter)


def default_tol(points: np.ndarray) -> float:
    return 1e-9 * (float(np.max(np.ptp(points, axis=0))) or 1.0)


def membership(y, points, tol: float | None = None) -> MembershipResult:
    """Is ``y`` within distance ``tol`` of conv(points)?"""
    P = points.points if isinstance(points, SampleSet) else np.asarray(points, dtype=float)
    if tol is None:
        tol = default_tol(P)
    if not tol > 0:
        raise ValueError("tol must be positive")
    return min_norm_point(P - np.asarray(y, dtype=float), tol)


def membership_batch(Y: np.ndarray, P: np.ndarray, tol: float | None = None):
    """Membership of many probes in conv(P); returns (inside, indeterminate) masks.

    Cheap separators (coordinate axes and the probe's own direction) settle
    most outside probes before falling back to the min-norm iteration.
    Indeterminate probes are reported as inside.
    """
    if tol is None:
        tol = default_tol(P)
    Y = np.atleast_2d(Y)
    inside = np.zeros(len(Y), dtype=bool)
    indet = np.zeros(len(Y), dtype=bool)
    out = np.any(Y > P.max(axis=0) + tol, axis=1) | np.any(Y < P.min(axis=0) - tol, axis=1)
    norms = np.linalg.norm(Y, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        U = Y / norms[:, None]
    own = np.einsum("ij,ij->i", U, Y) > np.max(U @ P.T, axis=1) + tol
    out |= np.nan_to_num(own, nan=False).astype(bool)
    for i in np.flatnonzero(~out):
        res = min_norm_point(P - Y[i], tol)
        if res.inside is None:
            inside[i] = indet[i] = True
        else:
            inside[i] = res.inside
    return inside, indet


# --------------------------------------------------------------------------
# Monte Carlo ratio
# --------------------------------------------------------------------------

@dataclass
class RatioEstimate:
    mean: float
    stderr: float
    replications: int
    probes_per_replication: int
    spec: DistributionSpec
    N: int
    seed: SeedSpec
    method: str = ""
    indeterminate: int = 0
    per_replication: np.ndarray = field(default=None, repr=False)
    hull_ratios: Optional[np.ndarray] = field(default=None, repr=False)
    warnings: list = field(default_factory=list)

    @property
    def indeterminate_rate(self) -> float:
        return self.indeterminate / (self.replications * self.probes_per_replication)

    @property
    def exact_mean(self) -> Optional[float]:
        """Mean exact hull-volume ratio over the same replications, if hulls were built."""
        return None if self.hull_ratios is None else float(np.mean(self.hull_ratios))

    @property
    def exact_stderr(self) -> Optional[float]:
        if self.hull_ratios is None or self.replications < 2:
            return None
        return float(np.std(self.hull_ratios, ddof=1) / math.sqrt(self.replications))


def _choose_method(n: int) -> str:
    if n == 2:
        return "polygon"
    if n <= 4:
        return "facets"
    return "mnp"


def _polygon_contains(V: np.ndarray, Y: np.ndarray, tol: float) -> np.ndarray:
    A = V
    B = np.roll(V, -1, axis=0)
    E = B - A
    cross = E[:, 0][None, :] * (Y[:, 1][:, None] - A[:, 1][None, :]) \
        - E[:, 1][None, :] * (Y[:, 0][:, None] - A[:, 0][None, :])
    return np.all(cross >= -tol * np.linalg.norm(E, axis=1)[None, :], axis=1)


def _replication(spec, N, M, seed, method, ref_volume):
    """One replication: (hit fraction, indeterminate count, exact hull ratio or nan)."""
    rng = rng_stream(seed)
    pts = draw(spec, N, rng)
    probes = draw_reference_uniform(spec, M, rng)
    if N <= spec.dim:
        return 0.0, 0, 0.0
    tol = default_tol(pts)
    if method == "polygon":
        idx = convex_hull_2d(pts)
        if len(idx) < 3:
            return 0.0, 0, 0.0
        V = pts[idx]
        area = 0.5 * float(np.dot(V[:, 0], np.roll(V[:, 1], -1)) - np.dot(np.roll(V[:, 0], -1), V[:, 1]))
        hits = _polygon_contains(V, probes, tol)
        return float(hits.mean()), 0, area / ref_volume
    if method == "facets":
        h = build_hull(pts)
        hits = h.contains(probes, tol)
        return float(hits.mean()), 0, hull_volume(h) / ref_volume
    inside, indet = membership_batch(probes, pts, tol)
    return float(inside.mean()), int(indet.sum()), math.nan


def _run_chunk(args):
    spec, N, M, seeds, method, ref_volume = args
    return [_replication(spec, N, M, s, method, ref_volume) for s in seeds]


def volume_ratio_mc(spec: DistributionSpec, N: int, R: int, M: int, seed: SeedSpec,
                    method: str | None = None, jobs: int = 1) -> RatioEstimate:
    """Two-stage MC estimate of E|K_N| / |conv support|.

    Replication r uses stream ``seed.child(r)``, so the result does not
    depend on ``jobs``.
    """
    if N < 1 or R < 1 or M < 1:
        raise ValueError("N, R and M must be positive")
    method = method or _choose_method(spec.dim)
    ref_volume = spec.reference_volume
    seeds = [seed.child(r) for r in range(R)]
    if jobs > 1 and R > 1:
        chunks = np.array_split(np.arange(R), min(jobs * 4, R))
        tasks = [(spec, N, M, [seeds[i] for i in c], method, ref_volume) for c in chunks if len(c)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [row for part in pool.map(_run_chunk, tasks) for row in part]
    else:
        results = _run_chunk((spec, N, M, seeds, method, ref_volume))
    frac = np.array([r[0] for r in results])
    indet = int(sum(r[1] for r in results))
    hull_ratios = np.array([r[2] for r in results])
    if np.all(np.isnan(hull_ratios)):
        hull_ratios = None
    stderr = float(np.std(frac, ddof=1) / math.sqrt(R)) if R > 1 else math.inf
    est = RatioEstimate(float(np.mean(frac)), stderr, R, M, spec, N, seed, method, indet,
                        frac, hull_ratios)
    if est.indeterminate_rate > INDETERMINATE_LIMIT:
        msg = (f"indeterminate membership rate {est.indeterminate_rate:.2%} exceeds "
               f"{INDETERMINATE_LIMIT:.1%}")
        est.warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return est
