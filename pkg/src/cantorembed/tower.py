"""The tower of rational functions

    r_0(z) = z,   r_1(z) = g_1(z),   r_{n+2} = r_n + g_{n+2}(r_{n+1}),
    g_n(u) = eps_n / (u - a_n),

with evaluation by direct recursion, Newton tracking of the poles level by
level, and residues by circle averaging.

Poles of consecutive levels cluster at distances far below double precision
(a new pole sits at offset c/a_n from the pole it was seeded from, and both c
and 1/a_n shrink super-exponentially), so all pole work is done in an
mpmath context whose precision is raised level by level from the residues and
parameters already known.  The precision schedule is a deterministic function
of the parameter schedule, so a tower rebuilt from a saved schedule is
bit-identical to the one computed during the original build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import mpmath
import numpy as np

from .sphere import SpherePoint, chord_to_angle, chordal_matrix, mp_chord

#: sentinel for the point at infinity inside the recursion
INF = None

BASE_DPS = 40
GUARD_DIGITS = 30
#: headroom so that regions at R up to |a_n| * 2**64 stay resolved
LADDER_HEADROOM_DIGITS = 20
MAX_NEWTON_ITERS = 100
RESIDUE_POINTS = 16
#: relative disagreement between the two circle averages that flags a
#: non-simple pole
RESIDUE_CONSISTENCY = 1e-6
#: averaging circles have radius |c| / (factor * (1 + |a_n|))
RESIDUE_RADIUS_FACTOR = 1024
#: double-precision evaluation is trusted while at most this many digits
#: are lost to cancellation in the denominators
FLOAT_LOSS_DIGITS = 6.0


class GenericityFailure(ArithmeticError):
    """Newton did not converge inside the punctured neighbourhood of a pole."""

    def __init__(self, level, seed_index, reason):
        super().__init__(f"level {level}, seed {seed_index}: {reason}")
        self.level = level
        self.seed_index = seed_index


class PoleCollision(ArithmeticError):
    """Two poles coincide at working precision."""


class MultiplePoleSuspected(ArithmeticError):
    """Circle averages at two radii disagree, so the pole is not simple."""


def fibonacci(n: int) -> list[int]:
    """k_0 ... k_n with k_0 = k_1 = 1."""
    k = [1, 1]
    while len(k) <= n:
        k.append(k[-1] + k[-2])
    return k[: n + 1]


@dataclass(eq=False)
class Pole:
    index: int
    z: Any  # mp complex, or INF
    residue: Any  # at infinity: residue of r(1/u) at u = 0
    birth_level: int
    parent: int | None = None  # pole of r_{birth-1} that seeded the Newton solve

    @property
    def location(self) -> SpherePoint:
        if self.z is INF:
            return SpherePoint.infinity()
        return SpherePoint.finite(self.z)

    @property
    def at_infinity(self) -> bool:
        return self.z is INF


class RationalTower:
    """Poles of r_0 ... r_depth plus evaluation.

    ``schedule`` only needs list attributes ``a`` and ``eps`` indexed from 1.
    """

    def __init__(self, schedule):
        self.schedule = schedule
        self.ctx = mpmath.MPContext()
        self.ctx.dps = BASE_DPS
        self.poles: list[Pole] = []
        self.levels: list[list[int]] = []
        self.dps: list[int] = []
        self._pole_at: dict = {}
        self._param_cache = None
        self._nearest_cache: dict = {}

    # ------------------------------------------------------------------ setup
    @classmethod
    def start(cls, schedule) -> "RationalTower":
        t = cls(schedule)
        ctx = t.ctx
        t._add_pole(INF, ctx.mpc(1), 0, None)
        t.levels.append([0])
        t.dps.append(ctx.dps)
        a1 = ctx.mpc(schedule.a[1])
        t._add_pole(a1, ctx.mpc(schedule.eps[1]), 1, None)
        t.levels.append([1])
        t.dps.append(ctx.dps)
        return t

    @classmethod
    def replay(cls, schedule, depth: int) -> "RationalTower":
        """Rebuild levels 0..depth from a stored schedule."""
        t = cls.start(schedule)
        for m in range(2, depth + 1):
            t.extend_poles(m)
        return t

    def _add_pole(self, z, residue, birth, parent) -> Pole:
        p = Pole(len(self.poles), z, residue, birth, parent)
        self.poles.append(p)
        if z is not INF:
            self._pole_at[(z.real, z.imag)] = p
        return p

    def checkpoint(self):
        return len(self.poles), len(self.levels), len(self.dps)

    def rollback(self, mark):
        """Forget poles and levels added after ``checkpoint``."""
        npoles, nlevels, ndps = mark
        for p in self.poles[npoles:]:
            if p.z is not INF:
                self._pole_at.pop((p.z.real, p.z.imag), None)
        del self.poles[npoles:], self.levels[nlevels:], self.dps[ndps:]
        self._nearest_cache.clear()

    def _move_pole(self, p: Pole, z):
        del self._pole_at[(p.z.real, p.z.imag)]
        p.z = z
        self._pole_at[(z.real, z.imag)] = p

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level(self, n: int) -> list[Pole]:
        return [self.poles[i] for i in self.levels[n]]

    def fibonacci(self) -> list[int]:
        return fibonacci(self.depth)

    def _params(self):
        key = (tuple(self.schedule.a[1:]), tuple(self.schedule.eps[1:]), self.ctx.prec)
        if self._param_cache is None or self._param_cache[0] != key:
            ctx = self.ctx
            A = [None] + [ctx.mpc(a) for a in self.schedule.a[1:]]
            E = [None] + [ctx.mpf(e) for e in self.schedule.eps[1:]]
            self._param_cache = (key, A, E)
        return self._param_cache[1], self._param_cache[2]

    # ------------------------------------------------------------- evaluation
    def values(self, z, n: int) -> list:
        """[r_0(z), ..., r_n(z)] in the working context; INF marks infinity."""
        A, E = self._params()
        ctx = self.ctx
        tiny = ctx.ldexp(1, -(ctx.prec - 8))
        birth = None
        if z is not INF:
            hit = self._pole_at.get((z.real, z.imag))
            if hit is not None:
                birth = hit.birth_level
        r = [z]
        for k in range(1, n + 1):
            u = r[k - 1]
            if u is INF:
                g = ctx.zero
            else:
                den = u - A[k]
                if k == birth or abs(den) <= tiny * (1 + abs(A[k])):
                    g = INF
                else:
                    g = E[k] / den
            if k == 1:
                r.append(g)
                continue
            prev = r[k - 2]
            r.append(INF if (prev is INF or g is INF) else prev + g)
        return r

    def values_and_derivs(self, z, n: int):
        """Values and z-derivatives of r_0..r_n at a finite non-pole z."""
        A, E = self._params()
        ctx = self.ctx
        r = [z]
        d = [ctx.mpc(1)]
        if n >= 1:
            den = z - A[1]
            r.append(E[1] / den)
            d.append(-E[1] / den**2)
        for k in range(2, n + 1):
            den = r[k - 1] - A[k]
            r.append(r[k - 2] + E[k] / den)
            d.append(d[k - 2] - E[k] * d[k - 1] / den**2)
        return r, d

    def evaluate(self, n: int, p: SpherePoint) -> SpherePoint:
        if n > self.depth:
            raise ValueError(f"level {n} beyond tower depth {self.depth}")
        z = self.to_mp(p)
        v = self.values(z, n)[n]
        return SpherePoint.infinity() if v is INF else SpherePoint.finite(v)

    def to_mp(self, p):
        """Working-context value of a SpherePoint / number; INF for infinity."""
        if isinstance(p, SpherePoint):
            if p.is_infinity:
                return INF
            if p.inverted:
                return 1 / self.ctx.mpc(p.value)
            return self.ctx.mpc(p.value)
        if p is INF:
            return INF
        return self.ctx.mpc(p)

    def values_float(self, zs, n: int):
        """Vectorised double-precision recursion.

        Returns ``(vals, reliable)`` with ``vals[k]`` = r_k on the sample and a
        mask of points whose denominators lost fewer than FLOAT_LOSS_DIGITS
        digits to cancellation.
        """
        zs = np.asarray(zs, dtype=complex)
        a = [None] + [complex(x) for x in self.schedule.a[1 : n + 1]]
        e = [None] + [float(x) for x in self.schedule.eps[1 : n + 1]]
        out = np.empty((n + 1, zs.size), dtype=complex)
        lost = np.zeros(zs.size)
        ok = np.isfinite(zs)
        out[0] = zs
        with np.errstate(all="ignore"):
            for k in range(1, n + 1):
                u = out[k - 1]
                den = u - a[k]
                scale = np.maximum(np.abs(u), abs(a[k]))
                rel = np.abs(den) / np.where(scale > 0, scale, 1)
                lost += np.maximum(0.0, -np.log10(np.where(rel > 0, rel, 1e-300)))
                g = np.where(np.isfinite(u), e[k] / den, 0)
                out[k] = g if k == 1 else out[k - 2] + g
                ok &= np.isfinite(out[k]) | ~np.isfinite(u)
        reliable = ok & (lost < FLOAT_LOSS_DIGITS) & np.isfinite(out).all(axis=0)
        return out, reliable

    def values_many(self, zs, n: int) -> np.ndarray:
        """r_0..r_n on a float sample, falling back to mp where doubles are unsafe."""
        vals, reliable = self.values_float(zs, n)
        for i in np.flatnonzero(~reliable):
            z = zs[i]
            v = self.values(INF if not np.isfinite(z) else self.ctx.mpc(z), n)
            vals[:, i] = [complex("inf") if x is INF else complex(x) for x in v]
        return vals

    # ------------------------------------------------------------ pole finding
    def _digits_needed(self, poles, a_abs) -> int:
        ctx = self.ctx
        best = 0.0
        for p in poles:
            if p.z is INF or p.residue == 0:
                continue
            ratio = (1 + abs(p.z)) * a_abs / abs(p.residue)
            best = max(best, float(ctx.log10(ratio)))
        return int(math.ceil(best)) + GUARD_DIGITS + LADDER_HEADROOM_DIGITS

    def _raise_precision(self, dps: int) -> bool:
        if dps > self.ctx.dps:
            self.ctx.dps = dps
            self._nearest_cache.clear()
            return True
        return False

    def _newton(self, n, target, z0, level_for_error, seed_index):
        """Root of r_n(z) = target starting at z0."""
        ctx = self.ctx
        tol = ctx.ldexp(1, -(ctx.prec - 12))
        z = z0
        for _ in range(MAX_NEWTON_ITERS):
            r, d = self.values_and_derivs(z, n)
            if d[n] == 0:
                raise GenericityFailure(level_for_error, seed_index, "zero derivative")
            step = (r[n] - target) / d[n]
            z = z - step
            if abs(step) <= tol * abs(z):
                return z
        raise GenericityFailure(level_for_error, seed_index, "Newton did not converge")

    def _repolish(self):
        """Bring every tracked finite pole to the current working precision."""
        A, _ = self._params()
        for p in self.poles:
            if p.z is INF or p.birth_level < 2:
                if p.birth_level == 1:
                    self._move_pole(p, A[1])
                continue
            z = self._newton(p.birth_level - 1, A[p.birth_level], self.ctx.mpc(p.z),
                             p.birth_level, p.index)
            self._move_pole(p, z)

    def extend_poles(self, to_level: int) -> list[Pole]:
        """Add level ``to_level`` = levels[to_level-2] ∪ {r_{to_level-1} = a}."""
        m = to_level
        if m != self.depth + 1 or m < 2:
            raise ValueError(f"can only extend depth {self.depth} to {self.depth + 1}")
        ctx = self.ctx
        a_abs = ctx.mpf(abs(complex(self.schedule.a[m])))
        seeds = self.level(m - 1)
        raised = self._raise_precision(self._digits_needed(seeds, a_abs))
        if raised:
            self._repolish()
        A, E = self._params()
        a = A[m]
        near = self.nearest_chart_distances(m - 1)
        new_z = []
        for j, w in enumerate(seeds):
            if w.at_infinity:
                z0 = a / w.residue
            else:
                z0 = w.z + w.residue / a
            z = self._newton(m - 1, a, z0, m, j)
            # the solution must stay in the punctured neighbourhood of its seed
            if w.at_infinity:
                off = 1 / abs(z)
            else:
                off = abs(z - w.z)
            if not off < near[j] / 2:
                raise GenericityFailure(m, j, "solution left the neighbourhood of its seed pole")
            new_z.append(z)
        self._check_new_against(m, new_z)
        new = [self._add_pole(z, ctx.mpc(0), m, w.index) for w, z in zip(seeds, new_z)]
        self.levels.append(list(self.levels[m - 2]) + [p.index for p in new])
        self._nearest_cache.pop(m, None)
        for p in new:
            p.residue = self.birth_residue(p)
        grow = self._digits_needed(self.level(m) + self.level(m - 1), a_abs)
        if self._raise_precision(grow):
            self._repolish()
            for p in new:
                p.residue = self.birth_residue(p)
        for p in new:
            p.residue = self.residue_at(m, p)
        self.dps.append(ctx.dps)
        return new

    def birth_residue(self, p: Pole):
        """eps_b / r_{b-1}'(p) for a pole born at level b >= 2."""
        if p.birth_level < 2:
            return p.residue
        A, E = self._params()
        b = p.birth_level
        _, d = self.values_and_derivs(p.z, b - 1)
        return E[b] / d[b - 1]

    def _check_new_against(self, m, new_z):
        """New poles must differ from the poles of r_{m-1} and r_{m-2}."""
        ctx = self.ctx
        floor = ctx.ldexp(1, -(ctx.prec - GUARD_DIGITS))
        others = [p.z for p in self.level(m - 1) + self.level(m - 2) if p.z is not INF]
        of = np.array([complex(z) for z in others])
        for z in new_z:
            zf = complex(z)
            close = np.flatnonzero(np.abs(of - zf) <= 1e-6 * (1 + abs(zf)))
            for i in close:
                if abs(others[i] - z) <= floor * (1 + abs(z)):
                    raise PoleCollision(f"new pole of level {m} coincides with an older pole")

    # ---------------------------------------------------------------- residues
    def nearest_chart_distances(self, n: int) -> list:
        """Distance from each pole of r_n to the nearest other one, measured in
        its own chart (z for finite poles, u = 1/z for infinity)."""
        if n in self._nearest_cache:
            return self._nearest_cache[n]
        out = nearest_chart_distances(self.ctx, [p.z for p in self.level(n)])
        self._nearest_cache[n] = out
        return out

    def residue_at(self, n: int, pole) -> Any:
        """lim (z - w) r_n(z) at a pole w of r_n (in the 1/z chart at infinity)."""
        ctx = self.ctx
        poles = self.level(n)
        if isinstance(pole, Pole):
            idx = [p.index for p in poles].index(pole.index)
            w = pole.z
        else:
            w = self.to_mp(pole)
            idx = None
            for i, p in enumerate(poles):
                if (p.z is INF and w is INF) or (p.z is not INF and w is not INF and p.z == w):
                    idx = i
            if idx is None:
                raise ValueError("point is not a tracked pole of this level")
        d = self.nearest_chart_distances(n)[idx]
        h = d / 4 if d != ctx.inf else ctx.mpf(1) / 4
        # stay where the pole term dominates the regular part of r_n
        A, _ = self._params()
        scale = abs(poles[idx].residue) if poles[idx].residue != 0 else abs(self.birth_residue(poles[idx]))
        top = abs(A[n]) if n >= 1 else ctx.one
        h = min(h, scale / (RESIDUE_RADIUS_FACTOR * (1 + top)))
        M = RESIDUE_POINTS

        def circle_average(rad):
            s = ctx.mpc(0)
            for k in range(M):
                zeta = rad * ctx.expjpi(ctx.mpf(2 * k) / M)
                z = 1 / zeta if w is INF else w + zeta
                v = self.values(z, n)[n]
                if v is INF:
                    raise MultiplePoleSuspected("pole met on the averaging circle")
                s += zeta * v
            return s / M

        a1 = circle_average(h)
        a2 = circle_average(h / 2)
        res = (2**M * a2 - a1) / (2**M - 1)
        if res == 0 or abs(a1 - a2) > RESIDUE_CONSISTENCY * abs(res):
            raise MultiplePoleSuspected(f"level {n}: residue estimates disagree")
        return res

    def laurent_check(self, n: int, pole: Pole, factor: float = 1e6):
        """|r_n(w + c/M) - M| / M for the first-order Laurent approximation.

        M is ``factor`` times the larger of 1 + |a_n| (size of the regular
        part) and |c| / d (d: chart distance to the nearest other pole)."""
        ctx = self.ctx
        idx = [p.index for p in self.level(n)].index(pole.index)
        d = self.nearest_chart_distances(n)[idx]
        A, _ = self._params()
        top = abs(A[n]) if n >= 1 else ctx.zero
        M = ctx.mpf(factor) * max(1 + top, abs(pole.residue) / d if d != ctx.inf else ctx.one)
        if pole.at_infinity:
            z = M / pole.residue
        else:
            z = pole.z + pole.residue / M
        v = self.values(z, n)[n]
        return abs(v - M) / M

    # --------------------------------------------------------------- checks
    def preimage_points(self, n: int) -> list[Pole]:
        """gamma_n^{-1}(∞_2) = poles of r_{n-1} ∪ poles of r_n."""
        if n == 0:
            return self.level(0)
        return self.level(n - 1) + self.level(n)

    def min_separation(self, n: int):
        """Smallest spherical distance between two poles of r_n (mp)."""
        ctx = self.ctx
        pts = [p.z for p in self.level(n)]
        if len(pts) < 2:
            return ctx.inf
        return min_pairwise_distance(ctx, pts)

    def min_cross_distance(self, n: int, m: int):
        """Smallest spherical distance between a pole of r_n and one of r_m."""
        ctx = self.ctx
        return min_cross_distance(ctx, [p.z for p in self.level(n)],
                                  [p.z for p in self.level(m)])

    def resolution(self):
        """Spherical distance below which two points are indistinguishable."""
        return self.ctx.ldexp(1, -(self.ctx.prec - GUARD_DIGITS))


def _float_view(zs):
    return np.array([complex("inf") if z is INF else complex(z) for z in zs])


def nearest_chart_distances(ctx, zs) -> list:
    """Per-point chart distance to the nearest other point (see RationalTower)."""
    n = len(zs)
    if n < 2:
        return [ctx.inf] * n
    zf = _float_view(zs)
    fin = np.isfinite(zf)
    out = []
    with np.errstate(all="ignore"):
        for i in range(n):
            if not fin[i]:
                inv = [1 / abs(zs[j]) for j in range(n) if j != i and fin[j]]
                out.append(min(inv) if inv else ctx.inf)
                continue
            dist = np.abs(zf - zf[i])
            dist[i] = np.inf
            dist[~fin] = np.inf
            close = dist <= 1e-6 * (1 + abs(zf[i]))
            far = np.where(close, np.inf, dist)
            best = ctx.mpf(far.min()) if np.isfinite(far.min()) else ctx.inf
            for j in np.flatnonzero(close):
                best = min(best, abs(zs[i] - zs[j]))
            out.append(best)
    return out


def _coarse_min(ctx, ch):
    """Smallest chord among pairs that double precision resolves."""
    far = ch[ch > 1e-6]
    return ctx.mpf(far.min()) if far.size else ctx.mpf(2)


def min_pairwise_distance(ctx, zs):
    zf = _float_view(zs)
    ch = chordal_matrix(zf)
    np.fill_diagonal(ch, np.inf)
    best = _coarse_min(ctx, ch)
    for i, j in zip(*np.nonzero(ch <= 1e-6)):
        if i < j:
            best = min(best, ctx.mpf(mp_chord(ctx, zs[i], zs[j])))
    return chord_to_angle(best)


def min_cross_distance(ctx, zs, ws):
    zf = _float_view(zs)
    wf = _float_view(ws)
    ch = chordal_matrix(np.concatenate([zf, wf]))[: len(zf), len(zf):]
    best = _coarse_min(ctx, ch)
    for i, j in zip(*np.nonzero(ch <= 1e-6)):
        best = min(best, ctx.mpf(mp_chord(ctx, zs[i], ws[j])))
    return chord_to_angle(best)
