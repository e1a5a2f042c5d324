"""gamma_n, its limit candidate, and the sampled convergence, injectivity and
properness checks.

Bulk samples are double precision; points next to the small components
(ring points of the certified frames) are carried as mp values because their
offsets from the seed poles are below double resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .regions import Frame, gamma_coords, in_delta, level_boxes, ring_points
from .schedule import ShearMap
from .sphere import SpherePoint, chordal_matrix, random_sphere_points
from .tower import INF, RationalTower

DERIV_FLOOR = 1e-8
DEFAULT_SAMPLES = 10_000


def gamma(n: int, z, tower: RationalTower) -> SpherePoint:
    """gamma_n(z) as a point of C̄²; ∞_2 exactly on the preimage points."""
    zm = tower.to_mp(z)
    if zm is INF:
        return SpherePoint.infinity(2)
    x, y = gamma_coords(n, tower.values(zm, n))
    if x is INF or y is INF:
        return SpherePoint.infinity(2)
    return SpherePoint.pair(x, y)


def gamma_by_shears(n: int, z: complex, schedule) -> tuple[complex, complex]:
    """f_n o ... o f_1 (z, 0), the defining composition."""
    x, y = complex(z), 0j
    for k in range(1, n + 1):
        x, y = ShearMap.of_level(k, schedule)(x, y)
    return x, y


def gamma_float(tower: RationalTower, zs, n: int):
    vals = tower.values_many(np.asarray(zs, dtype=complex), n)
    if n == 0:
        return vals[0], np.zeros_like(vals[0])
    if n % 2:
        return vals[n - 1], vals[n]
    return vals[n], vals[n - 1]


def _derivs_float(tower: RationalTower, zs, n: int):
    """(r_k, r_k') for k <= n in double precision."""
    a = [None] + [complex(x) for x in tower.schedule.a[1:n + 1]]
    e = [None] + [float(x) for x in tower.schedule.eps[1:n + 1]]
    r = [zs]
    d = [np.ones_like(zs)]
    with np.errstate(all="ignore"):
        for k in range(1, n + 1):
            den = r[k - 1] - a[k]
            g = e[k] / den
            dg = -e[k] * d[k - 1] / den**2
            r.append(g if k == 1 else r[k - 2] + g)
            d.append(dg if k == 1 else d[k - 2] + dg)
    return r, d


@dataclass
class KSample:
    """Points of K_n: a double-precision bulk plus exact boundary points."""

    level: int
    bulk: np.ndarray
    boundary: list = field(default_factory=list)

    def __len__(self):
        return len(self.bulk) + len(self.boundary)


def sample_K(tower: RationalTower, schedule, n: int, count: int, rng,
             boundary_per_side: int = 0):
    """Random points of K_n, optionally with the frame rings of level n."""
    R = schedule.R[n]
    kept = []
    total = 0
    tries = 0
    while total < count and tries < 20:
        zs = random_sphere_points(rng, max(count, 64))
        x, y = gamma_float(tower, zs, n)
        inside = np.isfinite(x) & np.isfinite(y) & (np.maximum(np.abs(x), np.abs(y)) <= R)
        kept.append(zs[inside])
        total += int(inside.sum())
        tries += 1
    bulk = np.concatenate(kept)[:count] if kept else np.zeros(0, complex)
    if not boundary_per_side:
        return bulk
    ring = []
    for box in level_boxes(tower, n, R):
        ring += ring_points(box.frame, boundary_per_side)
    return KSample(n, bulk, ring)


def injectivity_margin(tower: RationalTower, n: int, pts, rng, samples: int = 400) -> float:
    """min of |gamma_n(z) - gamma_n(w)| / d(z, w) over pairs and over the
    infinitesimal version |gamma_n'(z)| (1 + |z|^2) / 2."""
    if pts is None:
        pts = random_sphere_points(rng, samples)
    pts = np.asarray(pts, dtype=complex)[:samples]
    if len(pts) < 2:
        return math.inf
    x, y = gamma_float(tower, pts, n)
    img = np.stack([x, y], axis=1)
    diff = np.linalg.norm(img[:, None, :] - img[None, :, :], axis=2)
    chord = chordal_matrix(pts)
    angle = 2 * np.arcsin(np.minimum(chord / 2, 1.0))
    iu = np.triu_indices(len(pts), 1)
    ratio = diff[iu] / angle[iu]
    r, d = _derivs_float(tower, pts, n)
    top = d[n - 1:n + 1] if n >= 1 else d[:1]
    speed = np.sqrt(sum(np.abs(t) ** 2 for t in top)) * (1 + np.abs(pts) ** 2) / 2
    return float(min(ratio[np.isfinite(ratio)].min(), speed.min()))


# ---------------------------------------------------------------- checks
@dataclass
class CheckResult:
    name: str
    ok: bool
    rows: list = field(default_factory=list)
    detail: str = ""

    def __bool__(self):
        return self.ok


def _exact_residuals(tower: RationalTower, pts, n_max: int):
    """|g_{n+1}(r_n)| for n < n_max at exact points (one row per point)."""
    A, E = tower._params()
    out = np.zeros((len(pts), n_max))
    for i, z in enumerate(pts):
        vals = tower.values(z, n_max)
        for n in range(n_max):
            out[i, n] = float(abs(E[n + 1] / (vals[n] - A[n + 1])))
    return out


def cauchy_check(tower: RationalTower, schedule, k_range=None, samples: int = DEFAULT_SAMPLES,
                 seed: int = 0, boundary_per_side: int = 2) -> CheckResult:
    """max over K_k of |gamma_{n+1} - gamma_n| against delta_k 2^-(n+1+k)."""
    depth = schedule.depth
    rows = []
    ok = True
    ks = list(k_range) if k_range is not None else list(range(1, depth))
    for k in ks:
        if k == 0:
            rows.append((0, None, 0.0, math.inf, True))  # K_0 is empty
            continue
        rng = np.random.default_rng([seed, k, 7])
        s = sample_K(tower, schedule, k, samples, rng, boundary_per_side)
        vals = tower.values_many(s.bulk, depth) if len(s.bulk) else np.zeros((depth + 1, 0))
        exact = _exact_residuals(tower, s.boundary, depth) if s.boundary else np.zeros((0, depth))
        tail = 0.0
        prev = None
        for n in range(k, depth):
            bulk = np.abs(schedule.eps[n + 1] / (vals[n] - complex(schedule.a[n + 1])))
            worst = max(float(bulk.max()) if bulk.size else 0.0,
                        float(exact[:, n].max()) if exact.size else 0.0)
            bound = schedule.delta[k] * 2.0 ** -(n + 1 + k)
            ratio = worst / prev if prev else None
            good = worst < bound and (ratio is None or ratio <= 0.6)
            ok &= good
            rows.append((k, n, worst, bound, good))
            tail += worst
            prev = worst
        if not tail < schedule.delta[k]:
            ok = False
    return CheckResult("cauchy", ok, rows)


def properness_samples(tower: RationalTower, schedule, n: int, per_seed: int, rng):
    """Points of K_n minus K_{n-1}: z = w + c e^{i t}/T near the level-(n-1)
    seeds with T log-uniform in (R_{n-1}, R_n), kept if inside Delta_{n-1}
    and outside Delta_n."""
    ctx = tower.ctx
    R0, R1 = schedule.R[n - 1], schedule.R[n]
    seeds = tower.preimage_points(n - 1)
    out = []
    for w in seeds:
        for _ in range(per_seed):
            T = ctx.mpf(math.exp(rng.uniform(math.log(R0), math.log(R1))))
            zeta = w.residue * ctx.expjpi(ctx.mpf(2 * rng.random())) / T
            z = 1 / zeta if w.at_infinity else w.z + zeta
            if in_delta(n - 1, tower.values(z, n - 1), ctx.mpf(R0)) and \
                    not in_delta(n, tower.values(z, n), ctx.mpf(R1)):
                out.append(z)
    return out


def properness_check(tower: RationalTower, schedule, n_range=None, per_seed: int = 4,
                     seed: int = 0) -> CheckResult:
    """gamma_{n+j}(K_n minus K_{n-1}) avoids B_{n-3}; worst margins grow in n."""
    depth = schedule.depth
    ns = list(n_range) if n_range is not None else list(range(3, depth + 1))
    rows = []
    ok = True
    last_margin = None
    for n in ns:
        rng = np.random.default_rng([seed, n, 11])
        pts = properness_samples(tower, schedule, n, per_seed, rng)
        if not pts:
            rows.append((n, 0, math.nan, False))
            ok = False
            continue
        worst = math.inf
        for z in pts:
            vals = tower.values(z, depth)
            for j in range(0, depth - n + 1):
                x, y = gamma_coords(n + j, vals)
                size = math.inf if (x is INF or y is INF) else float(max(abs(x), abs(y)))
                worst = min(worst, size)
        margin = worst - schedule.R[n - 3]
        good = margin > 0 and (last_margin is None or margin > last_margin)
        ok &= good
        rows.append((n, len(pts), margin, good))
        last_margin = margin
    return CheckResult("properness", ok, rows)


def injectivity_check(tower: RationalTower, schedule, n: int, samples: int = 400,
                      seed: int = 0) -> CheckResult:
    """Sampled injectivity of gamma_n on K_{n-1} plus a derivative floor."""
    rng = np.random.default_rng([seed, n, 13])
    if n == 1:
        pts = random_sphere_points(rng, samples)
    else:
        pts = sample_K(tower, schedule, n - 1, samples, rng)
    x, y = gamma_float(tower, pts, n)
    img = np.stack([x, y], axis=1)
    diff = np.linalg.norm(img[:, None, :] - img[None, :, :], axis=2)
    iu = np.triu_indices(len(pts), 1)
    min_gap = float(diff[iu].min())
    # divided differences in four directions
    h = 1e-7 * (1 + np.abs(pts))
    base = np.linalg.norm(img, axis=1)
    worst = math.inf
    for dirn in (1, 1j, -1, -1j):
        xs, ys = gamma_float(tower, pts + h * dirn, n)
        dd = np.sqrt(np.abs(xs - x) ** 2 + np.abs(ys - y) ** 2) / h
        worst = min(worst, float(np.min(dd / (1 + base))))
    ok = min_gap > 0 and worst > DERIV_FLOOR
    return CheckResult("injectivity", ok, [(n, min_gap, worst)])


def a_in_c_check(tower: RationalTower, schedule, n: int, samples: int = DEFAULT_SAMPLES,
                 seed: int = 0) -> CheckResult:
    """Every sampled gamma_n(z) has a coordinate of modulus < R_n."""
    rng = np.random.default_rng([seed, n, 19])
    zs = random_sphere_points(rng, samples)
    x, y = gamma_float(tower, zs, n)
    small = np.minimum(np.abs(x), np.abs(y))
    worst = float(np.nanmax(small)) / schedule.R[n]
    return CheckResult("A_n in C_n", worst < 1, [(n, worst)])


def mid_check(tower: RationalTower, schedule, n: int, samples: int = 2000,
              seed: int = 0) -> CheckResult:
    """Images of K_n samples (including frame rings) lie in the bidisc B_n."""
    rng = np.random.default_rng([seed, n, 23])
    s = sample_K(tower, schedule, n, samples, rng, boundary_per_side=1)
    R = schedule.R[n]
    x, y = gamma_float(tower, s.bulk, n)
    worst = float(np.max(np.maximum(np.abs(x), np.abs(y)))) / R if len(s.bulk) else 0.0
    for z in s.boundary:
        fx, fy = gamma_coords(n, tower.values(z, n))
        worst = max(worst, math.inf if fx is INF or fy is INF else float(max(abs(fx), abs(fy))) / R)
    return CheckResult("gamma_n(K_n) in B_n", worst <= 1, [(n, worst)])


def preimage_chain_check(tower: RationalTower) -> CheckResult:
    """gamma_n^{-1}(∞_2) strictly increases with n."""
    ok = True
    rows = []
    for n in range(1, tower.depth):
        a = {p.index for p in tower.preimage_points(n)}
        b = {p.index for p in tower.preimage_points(n + 1)}
        good = a < b
        ok &= good
        rows.append((n, len(a), len(b), good))
    return CheckResult("preimage chain", ok, rows)


__all__ = [
    "gamma", "gamma_by_shears", "gamma_float", "sample_K", "injectivity_margin",
    "cauchy_check", "properness_check", "injectivity_check", "a_in_c_check",
    "mid_check", "preimage_chain_check", "Frame",
]
