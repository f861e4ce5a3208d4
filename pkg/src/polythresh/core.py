"""Seeded randomness, log-domain combinatorics and exact planar geometry.

Everything in here is used as a building block or as an oracle by the
higher-level modules, so it favours transparency over speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

_U64 = (1 << 64) - 1


class DegenerateInputError(ValueError):
    """Raised when a geometric input has no interior (e.g. a zero-area polygon)."""


@dataclass(frozen=True)
class SeedSpec:
    """A master seed plus a stream index; one stream per parallel task."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _U64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if not 0 <= self.stream_id <= _U64:
            raise ValueError(f"stream_id must be a non-negative 64-bit int, got {self.stream_id}")

    def child(self, index: int) -> "SeedSpec":
        """Sub-stream ``index`` of this stream (used for replications)."""
        return SeedSpec(self.master_seed, ((self.stream_id << 32) + index) & _U64)


def rng_stream(seed: SeedSpec) -> np.random.Generator:
    """Counter-based generator keyed by ``(master_seed, stream_id)``.

    Philox is keyed directly, so the variate sequence of a stream does not
    depend on which other streams exist or in what order they are consumed.
    """
    key = (seed.stream_id << 64) | seed.master_seed
    return np.random.Generator(np.random.Philox(key=key))


def log_binomial(N: int, n: int) -> float:
    """Natural log of the binomial coefficient C(N, n)."""
    if n < 0 or N < 0 or n > N:
        raise ValueError(f"log_binomial needs 0 <= n <= N, got N={N}, n={n}")
    k = min(n, N - n)
    if k == 0:
        return 0.0
    if k <= 128:
        # short exact-ish product: avoids cancellation between two huge lgammas
        return math.fsum(math.log((N - k + i) / i) for i in range(1, k + 1))
    return math.lgamma(N + 1) - math.lgamma(n + 1) - math.lgamma(N - n + 1)


# --------------------------------------------------------------------------
# planar geometry
# --------------------------------------------------------------------------

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class Polygon2D:
    """Convex polygon with counter-clockwise vertices.

    Coordinates may be floats or ``Fraction``s; with fractions every
    computation below is exact.
    """

    vertices: tuple

    def __post_init__(self):
        verts = tuple(tuple(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        k = len(verts)
        if k < 3:
            raise DegenerateInputError("a polygon needs at least 3 vertices")
        for i in range(k):
            if verts[i] == verts[(i + 1) % k]:
                raise ValueError("duplicate consecutive vertices")
        for i in range(k):
            if _cross(verts[i], verts[(i + 1) % k], verts[(i + 2) % k]) < 0:
                raise ValueError("vertices are not convex and counter-clockwise")

    @classmethod
    def box(cls, lo=-1, hi=1) -> "Polygon2D":
        return cls(((lo, lo), (hi, lo), (hi, hi), (lo, hi)))

    @property
    def area(self):
        return polygon_area(self.vertices)

    def contains(self, p, tol: float = 0.0) -> bool:
        """Closed containment test (``tol`` widens the polygon)."""
        v = self.vertices
        k = len(v)
        for i in range(k):
            a, b = v[i], v[(i + 1) % k]
            edge_len = math.hypot(b[0] - a[0], b[1] - a[1])
            if _cross(a, b, p) < -tol * edge_len:
                return False
        return True


def polygon_area(vertices: Sequence) -> float:
    """Signed shoelace area (positive for counter-clockwise order)."""
    k = len(vertices)
    if k < 3:
        return 0
    s = 0
    for i in range(k):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % k]
        s += x0 * y1 - x1 * y0
    return s / 2


def clip_halfplane(vertices: Sequence, direction, offset) -> list:
    """Sutherland-Hodgman step: keep the part with <x, direction> <= offset."""
    out = []
    k = len(vertices)
    if k == 0:
        return out
    d0, d1 = direction
    vals = [p[0] * d0 + p[1] * d1 - offset for p in vertices]
    for i in range(k):
        p, q = vertices[i], vertices[(i + 1) % k]
        fp, fq = vals[i], vals[(i + 1) % k]
        if fp <= 0:
            out.append(tuple(p))
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def halfplane_polygon_measure(P: Polygon2D, direction, offset):
    """Area of ``P ∩ {x : <x, direction> <= offset}``.

    Exact when the polygon, direction and offset are rational.
    """
    area = P.area
    if area == 0:
        raise DegenerateInputError("polygon has zero area")
    if direction[0] == 0 and direction[1] == 0:
        raise ValueError("direction must be nonzero")
    if not isinstance(offset, (int, Fraction)):
        offset = float(offset)
    return polygon_area(clip_halfplane(P.vertices, direction, offset))


def convex_hull_2d(points) -> np.ndarray:
    """Indices of the hull vertices of a planar point set, counter-clockwise.

    Andrew's monotone chain; collinear boundary points are dropped.
    """
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    if m < 3:
        return np.arange(m)
    order = np.lexsort((pts[:, 1], pts[:, 0]))

    def half(idx):
        chain = []
        for i in idx:
            while len(chain) >= 2 and _cross(pts[chain[-2]], pts[chain[-1]], pts[i]) <= 0:
                chain.pop()
            chain.append(i)
        return chain

    lower = half(order)
    upper = half(order[::-1])
    return np.array(lower[:-1] + upper[:-1], dtype=int)


def hull_area_2d(points) -> float:
    """Area of the convex hull of a planar point set."""
    pts = np.asarray(points, dtype=float)
    idx = convex_hull_2d(pts)
    if len(idx) < 3:
        return 0.0
    x, y = pts[idx, 0], pts[idx, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def triangle_areas(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorised areas of triangles given row-stacked vertices."""
    return 0.5 * np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                        - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
