"""Points of the Riemann sphere (and of the compactified C^2), stereographic
projection and spherical distances.

Distances use ``d(x, y) = arccos(phi(x) . phi(y))`` evaluated through the
equivalent chordal form ``2 asin(|phi(x) - phi(y)| / 2)``, which keeps full
relative accuracy for nearby points.  Values may be Python complex numbers or
mpmath numbers; mpmath inputs give mpmath outputs so that distances far below
the double-precision range do not underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Sequence

import numpy as np
from mpmath.ctx_mp_python import _mpc, _mpf
from scipy.spatial import ConvexHull

FINITE = "finite"
INFINITY = "infinity"

#: points of C with |z| above this are stored as w = 1/z
INVERT_THRESHOLD = 1e8
#: above this many points set_diameter prunes to the convex hull
EXACT_SCAN_LIMIT = 4096


class UseInfinityChart(ArithmeticError):
    """|z|^2 overflowed; the point has to be represented through w = 1/z."""


def is_mp(x) -> bool:
    return isinstance(x, (_mpf, _mpc))


def _ctx(*values):
    for v in values:
        if is_mp(v):
            return v.context
    return None


@dataclass(frozen=True)
class SpherePoint:
    """A point of C̄ (dimension 1) or of C̄² (dimension 2).

    For dimension 1 a finite point with ``inverted=True`` stores
    ``value = 1/z``.  Dimension-2 points store a pair ``(x, y)``.
    """

    kind: str
    value: Any = None
    dimension: int = 1
    inverted: bool = False

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.kind == INFINITY:
            if self.value is not None:
                raise ValueError("infinity carries no finite value")
            return
        if self.kind != FINITE:
            raise ValueError(f"unknown kind {self.kind!r}")
        coords = self.value if self.dimension == 2 else (self.value,)
        if self.dimension == 2 and len(coords) != 2:
            raise ValueError("a point of C^2 needs two coordinates")
        for c in coords:
            if c is None:
                raise ValueError("finite point without a value")
            if not is_mp(c) and not np.isfinite(complex(c)):
                raise ValueError(f"non-finite coordinate {c!r}")

    @classmethod
    def finite(cls, z) -> "SpherePoint":
        """Point z of C, switching to the inverted chart when |z| is large."""
        if not is_mp(z):
            z = complex(z)
        if abs(z) > INVERT_THRESHOLD:
            return cls(FINITE, 1 / z, 1, True)
        return cls(FINITE, z, 1, False)

    @classmethod
    def from_inverted(cls, w) -> "SpherePoint":
        """Point 1/w; ``w = 0`` gives infinity."""
        if w == 0:
            return cls.infinity()
        if abs(w) < 1 / INVERT_THRESHOLD:
            return cls(FINITE, w if is_mp(w) else complex(w), 1, True)
        return cls.finite(1 / w)

    @classmethod
    def infinity(cls, dimension: int = 1) -> "SpherePoint":
        return cls(INFINITY, None, dimension)

    @classmethod
    def pair(cls, x, y) -> "SpherePoint":
        return cls(FINITE, (x, y), 2)

    @property
    def is_infinity(self) -> bool:
        return self.kind == INFINITY

    @property
    def z(self):
        """Affine coordinate(s); None at infinity."""
        if self.is_infinity:
            return None
        if self.inverted:
            return 1 / self.value
        return self.value

    def to_complex(self) -> complex:
        """Nearest double-precision value (inf for the point at infinity)."""
        if self.is_infinity:
            return complex(math.inf, 0)
        return complex(self.z)


@dataclass(frozen=True)
class PointSet:
    points: tuple

    def __post_init__(self):
        dims = {p.dimension for p in self.points}
        if len(dims) > 1:
            raise ValueError("points of a PointSet must share one dimension")

    @cached_property
    def diameter(self):
        return set_diameter(self)


def stereographic_project(p: SpherePoint) -> np.ndarray:
    """Unit vector in R^3 (dimension 1) or R^5 (dimension 2)."""
    n = 2 * p.dimension
    if p.is_infinity:
        out = np.zeros(n + 1)
        out[-1] = 1.0
        return out
    if p.dimension == 2:
        x, y = (complex(c) for c in p.value)
        try:
            s = abs(x) ** 2 + abs(y) ** 2
        except OverflowError:
            raise UseInfinityChart(p) from None
        if not math.isfinite(s):
            raise UseInfinityChart(p)
        v = np.array([x.real, x.imag, y.real, y.imag])
        return np.append(2 * v, s - 1) / (s + 1)
    w = p.value
    if p.inverted:
        w = complex(w)
        s = abs(w) ** 2
        return np.array([2 * w.real, -2 * w.imag, 1 - s]) / (1 + s)
    z = complex(w)
    try:
        s = abs(z) ** 2
    except OverflowError:
        raise UseInfinityChart(p) from None
    if not math.isfinite(s):
        raise UseInfinityChart(p)
    return np.array([2 * z.real, 2 * z.imag, s - 1]) / (s + 1)


def _homogeneous(p: SpherePoint):
    """(z0, z1) with z = z0 / z1."""
    if p.is_infinity:
        return 1, 0
    if p.inverted:
        return 1, p.value
    return p.value, 1


def _angle_1d(p: SpherePoint, q: SpherePoint):
    """Angle between phi(p) and phi(q) as 2 atan2(|Z ^ W|, |<Z, W>|).

    Well conditioned for nearby and for nearly antipodal points alike."""
    z0, z1 = _homogeneous(p)
    w0, w1 = _homogeneous(q)
    wedge = abs(z0 * w1 - z1 * w0)
    inner = abs(z0 * _conj(w0) + z1 * _conj(w1))
    ctx = _ctx(p.value, q.value)
    if ctx is not None:
        return 2 * ctx.atan2(ctx.mpf(wedge), ctx.mpf(inner))
    return 2 * math.atan2(wedge, inner)


def _conj(x):
    return x.conjugate() if hasattr(x, "conjugate") else x


def _chord_2d(p: SpherePoint, q: SpherePoint):
    if p.is_infinity and q.is_infinity:
        return 0
    if p.is_infinity:
        p, q = q, p
    x1, y1 = p.value
    s1 = abs(x1) ** 2 + abs(y1) ** 2
    if q.is_infinity:
        return 2 / _sqrt(1 + s1)
    x2, y2 = q.value
    s2 = abs(x2) ** 2 + abs(y2) ** 2
    diff2 = abs(x1 - x2) ** 2 + abs(y1 - y2) ** 2
    return 2 * _sqrt(diff2) / _sqrt((1 + s1) * (1 + s2))


def _sqrt(x):
    return x.context.sqrt(x) if is_mp(x) else math.sqrt(x)


def chord_to_angle(chord):
    """Great-circle angle subtending a chord of the unit sphere."""
    if is_mp(chord):
        ctx = chord.context
        return 2 * ctx.asin(min(chord / 2, ctx.mpf(1)))
    return 2 * math.asin(min(chord / 2, 1.0))


def spherical_distance(p: SpherePoint, q: SpherePoint):
    """Angle in [0, pi] between the stereographic images of p and q."""
    if p.dimension != q.dimension:
        raise ValueError(
            f"dimension mismatch: {p.dimension} vs {q.dimension}"
        )
    if p.dimension == 1:
        return _angle_1d(p, q)
    return chord_to_angle(_chord_2d(p, q))


def _unit_vectors(points: Sequence[SpherePoint]) -> np.ndarray:
    return np.array([stereographic_project(p) for p in points])


def set_diameter(s: PointSet):
    """Largest pairwise spherical distance in a nonempty point set."""
    pts = list(s.points)
    if not pts:
        raise ValueError("diameter of an empty set")
    if len(pts) == 1:
        return 0.0
    if any(is_mp(p.value) or (p.dimension == 2 and p.value is not None
                              and any(is_mp(c) for c in p.value))
           for p in pts):
        best = 0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = max(best, spherical_distance(pts[i], pts[j]))
        return best
    vecs = _unit_vectors(pts)
    if len(pts) > EXACT_SCAN_LIMIT and pts[0].dimension == 1:
        try:
            vecs = vecs[ConvexHull(vecs).vertices]
        except Exception:
            # degenerate (e.g. coplanar) sets fall back to the full scan
            pass
    best = 0.0
    for i in range(len(vecs) - 1):
        d = np.linalg.norm(vecs[i + 1:] - vecs[i], axis=1).max()
        best = max(best, float(d))
    return chord_to_angle(best)


def chordal_matrix(zs: np.ndarray) -> np.ndarray:
    """Pairwise chordal distances for an array of complex numbers (inf allowed)."""
    zs = np.asarray(zs, dtype=complex)
    inf = ~np.isfinite(zs)
    safe = np.where(inf, 0, zs)
    s = np.abs(safe) ** 2
    vec = np.stack([2 * safe.real, 2 * safe.imag, s - 1], axis=1) / (s + 1)[:, None]
    vec[inf] = (0.0, 0.0, 1.0)
    diff = vec[:, None, :] - vec[None, :, :]
    return np.linalg.norm(diff, axis=2)


def random_sphere_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform points on the sphere, returned as affine coordinates."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    # inverse stereographic projection from the north pole
    return (v[:, 0] + 1j * v[:, 1]) / (1 - v[:, 2])


def mp_chord(ctx, z, w):
    """Chordal distance between two points of C̄ given as mp values or None (∞)."""
    if z is None and w is None:
        return ctx.zero
    if z is None:
        return 2 / ctx.sqrt(1 + abs(w) ** 2)
    if w is None:
        return 2 / ctx.sqrt(1 + abs(z) ** 2)
    return 2 * abs(z - w) / ctx.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2))


def mp_distance(ctx, z, w):
    return chord_to_angle(ctx.mpf(mp_chord(ctx, z, w)))


__all__ = [
    "SpherePoint",
    "PointSet",
    "UseInfinityChart",
    "stereographic_project",
    "spherical_distance",
    "set_diameter",
    "chordal_matrix",
    "random_sphere_points",
    "mp_chord",
    "mp_distance",
]
