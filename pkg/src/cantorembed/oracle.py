"""Independent small-depth backend: r_n = p_n / q_n as dense polynomials.

    p_{n+2} = p_n (p_{n+1} - a q_{n+1}) + eps q_n q_{n+1}
    q_{n+2} = q_n (p_{n+1} - a q_{n+1})

Coefficients are mp numbers, lowest degree first.  The roots of q_n are found
by Aberth-Ehrlich iteration from generic starting points, so they do not
depend on the Newton seeding used by the tower.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .sphere import chordal_matrix, mp_distance, random_sphere_points
from .tower import INF, fibonacci

ORACLE_MAX_DEPTH = 8
OVERFLOW = mpmath.mpf(10) ** 300
ROOT_TOL = 1e-10
ABERTH_MAX_ITERS = 5000


class OracleOverflow(ArithmeticError):
    pass


class RootFindingFailure(ArithmeticError):
    pass


def _mul(ctx, f, g):
    out = [ctx.zero] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x == 0:
            continue
        for j, y in enumerate(g):
            out[i + j] += x * y
    return out


def _add(ctx, f, g):
    n = max(len(f), len(g))
    return [(f[i] if i < len(f) else ctx.zero) + (g[i] if i < len(g) else ctx.zero)
            for i in range(n)]


def _scale(f, c):
    return [c * x for x in f]


def _trim(f):
    f = list(f)
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def degree(f) -> int:
    return len(_trim(f)) - 1


def horner(f, z):
    acc = f[-1]
    for c in reversed(f[:-1]):
        acc = acc * z + c
    return acc


@dataclass
class PolyLevel:
    n: int
    p: list
    q: list

    @property
    def order_at_infinity(self) -> int:
        """Order of the pole of p/q at ∞ (0 if finite there)."""
        return max(degree(self.p) - degree(self.q), 0)

    @property
    def pole_count(self) -> int:
        return degree(self.q) + self.order_at_infinity


class PolyOracle:
    """Levels 0..depth of the expanded recursion, in its own mp context."""

    def __init__(self, schedule, depth: int = ORACLE_MAX_DEPTH, dps: int = 120):
        if depth > ORACLE_MAX_DEPTH:
            raise ValueError(f"oracle depth is capped at {ORACLE_MAX_DEPTH}")
        self.ctx = ctx = mpmath.MPContext()
        ctx.dps = dps
        a = [None] + [ctx.mpc(x) for x in schedule.a[1:depth + 1]]
        e = [None] + [ctx.mpf(x) for x in schedule.eps[1:depth + 1]]
        levels = [PolyLevel(0, [ctx.zero, ctx.one], [ctx.one])]
        if depth >= 1:
            levels.append(PolyLevel(1, [e[1]], [-a[1], ctx.one]))
        for n in range(2, depth + 1):
            lo, hi = levels[n - 2], levels[n - 1]
            shifted = _add(ctx, hi.p, _scale(hi.q, -a[n]))
            p = _add(ctx, _mul(ctx, lo.p, shifted), _scale(_mul(ctx, lo.q, hi.q), e[n]))
            q = _mul(ctx, lo.q, shifted)
            biggest = max(abs(c) for c in p + q)
            if biggest > OVERFLOW:
                raise OracleOverflow(f"level {n}: coefficient of size {ctx.nstr(biggest, 3)}")
            levels.append(PolyLevel(n, _trim(p), _trim(q)))
        self.levels = levels

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def evaluate(self, n: int, z):
        """r_n(z) from the expanded form; INF at roots of q."""
        ctx = self.ctx
        lev = self.levels[n]
        if z is INF:
            return INF if lev.order_at_infinity else (
                lev.p[-1] / lev.q[-1] if degree(lev.p) == degree(lev.q) else ctx.zero)
        z = ctx.mpc(z)
        den = horner(lev.q, z)
        if den == 0:
            return INF
        return horner(lev.p, z) / den

    def poles(self, n: int):
        """Finite roots of q_n (Aberth-Ehrlich), plus INF if r_n has a pole at ∞."""
        lev = self.levels[n]
        roots = aberth(self.ctx, lev.q) if degree(lev.q) > 0 else []
        return roots + ([INF] if lev.order_at_infinity else [])


def oracle_expand(tower, n: int, dps: int | None = None) -> PolyOracle:
    """Oracle through level n using the tower's schedule."""
    if n > ORACLE_MAX_DEPTH:
        raise ValueError(f"oracle depth is capped at {ORACLE_MAX_DEPTH}")
    if dps is None:
        dps = max(60, tower.dps[min(n, tower.depth)] + 40) if tower is not None and tower.dps else 120
    return PolyOracle(tower.schedule, n, dps)


def aberth(ctx, coeffs, tol=None, max_iters: int = ABERTH_MAX_ITERS):
    """All roots of a polynomial (coefficients lowest degree first)."""
    f = _trim(coeffs)
    deg = len(f) - 1
    if deg < 1:
        return []
    lead = f[-1]
    mon = [c / lead for c in f]
    df = [i * mon[i] for i in range(1, len(mon))]
    if tol is None:
        tol = ctx.ldexp(1, -(ctx.prec - 16))
    # starting circle from the Fujiwara bound, slightly rotated
    bound = 2 * max(abs(mon[deg - k]) ** (ctx.one / k) for k in range(1, deg + 1))
    bound = max(bound, ctx.mpf(1) / 2)
    z = [bound * ctx.expjpi(2 * ctx.mpf(k) / deg + ctx.mpf(1) / (2 * deg) + ctx.mpf("0.3"))
         for k in range(deg)]
    absmon = [abs(c) for c in mon]
    unit = ctx.ldexp(1, -ctx.prec)
    done = [False] * deg
    for _ in range(max_iters):
        moved = False
        for i in range(deg):
            if done[i]:
                continue
            pv = horner(mon, z[i])
            # Horner rounding bound: below it the residual is pure noise
            if abs(pv) <= 4 * deg * unit * horner(absmon, abs(z[i])):
                done[i] = True
                continue
            ratio = pv / horner(df, z[i])
            s = ctx.zero
            for j in range(deg):
                if j != i:
                    s += 1 / (z[i] - z[j])
            step = ratio / (1 - ratio * s)
            z[i] -= step
            if abs(step) <= tol * (abs(z[i]) + tol):
                done[i] = True
            else:
                moved = True
        if not moved:
            break
    else:
        raise RootFindingFailure(f"Aberth iteration did not settle for degree {deg}")
    norm = max(abs(c) for c in f)
    for r in z:
        if abs(horner(f, r)) >= ROOT_TOL * norm * max(1, abs(r)) ** deg:
            raise RootFindingFailure("root residual above tolerance")
    return z


def match_roots(ctx, tracked, found):
    """Pair tracked poles with oracle roots by exclusive nearest neighbours.

    Returns the largest spherical distance between matched pairs, or raises
    if the two sets cannot be matched one to one."""
    if len(tracked) != len(found):
        raise ValueError(f"{len(tracked)} tracked poles against {len(found)} roots")
    unused = list(range(len(found)))
    worst = ctx.zero
    for t in tracked:
        tz = t if t is INF else ctx.mpc(t)
        best = None
        for k in unused:
            fz = found[k]
            if (tz is INF) != (fz is INF):
                continue
            d = ctx.zero if tz is INF else mp_distance(ctx, tz, fz)
            if best is None or d < best[0]:
                best = (d, k)
        if best is None:
            raise ValueError("a tracked pole has no counterpart")
        unused.remove(best[1])
        worst = max(worst, best[0])
    return worst


def expected_pole_count(n: int) -> int:
    return fibonacci(n)[n]


def sample_away_from_poles(rng, tower, n: int, count: int, min_dist: float = 0.01):
    """Random sphere points at spherical distance > min_dist from the poles of r_n."""
    poles = np.array([complex("inf") if p.z is INF else complex(p.z) for p in tower.level(n)])
    out = []
    while len(out) < count:
        zs = random_sphere_points(rng, 2 * count)
        ch = chordal_matrix(np.concatenate([zs, poles]))[: len(zs), len(zs):]
        ang = 2 * np.arcsin(np.minimum(ch / 2, 1))
        out += list(zs[ang.min(axis=1) > min_dist])
    return out[:count]


def oracle_agreement(tower, oracle: PolyOracle, n: int, points: int = 200, seed: int = 0):
    """(max relative evaluation gap, max root-to-pole distance) at level n."""
    rng = np.random.default_rng([seed, n, 3])
    octx = oracle.ctx
    worst = 0.0
    for z in sample_away_from_poles(rng, tower, n, points):
        rec = tower.values(tower.ctx.mpc(z), n)[n]
        ref = oracle.evaluate(n, z)
        gap = abs(octx.mpc(rec) - ref) / (1 + abs(ref))
        worst = max(worst, float(gap))
    roots = oracle.poles(n)
    match = match_roots(octx, [p.z if p.z is INF else octx.mpc(p.z) for p in tower.level(n)], roots)
    return worst, float(match)
