"""Delta_n = gamma_n^{-1}(C̄² minus B_n) and K_n as explicit components.

Every component of Delta_n contains a point of gamma_n^{-1}(∞_2) (the
modulus of r_n or r_{n-1} exceeds R_n on it, so by the maximum principle it
must reach a pole).  Components are therefore handled one seed at a time, in
a local square frame around the seed pole sized from its Laurent radius
|c|/R_n.  A frame whose boundary lies in K_n encloses the whole component;
pairwise disjoint frames then give an exact census.

Two levels of work are offered:

* ``certify_level``: ring samples on each frame boundary, Laurent proxy
  points inside, frame diameters as one-sided diameter bounds.  Cheap
  enough to drive the R_n ladder at every depth.
* ``decompose``: an adaptive quadtree inside every frame, connected
  component labelling and diameter intervals from the labelled cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError

from .sphere import chord_to_angle, mp_chord, random_sphere_points
from .tower import INF, Pole, RationalTower, fibonacci, nearest_chart_distances

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

BOX_FACTOR = 2.0
#: frames are at most this fraction of the distance to the nearest other seed
SEPARATION_FRACTION = 0.35
#: a frame must exceed the Laurent radius by this factor to hold its component
MIN_BOX_OVER_RHO = 1.25
RING_POINTS_PER_SIDE = 8
SOLUTION_SAMPLES = 16


@dataclass(frozen=True)
class Bidisc:
    level: int
    radius: float

    def contains(self, x, y) -> bool:
        if x is INF or y is INF:
            return False
        return abs(x) <= self.radius and abs(y) <= self.radius


def gamma_coords(n: int, vals: list):
    """(first, second) coordinate of gamma_n from r_0..r_n."""
    if n == 0:
        return vals[0], 0
    if n % 2:
        return vals[n - 1], vals[n]
    return vals[n], vals[n - 1]


def in_delta(n: int, vals: list, R) -> bool:
    x, y = gamma_coords(n, vals)
    if x is INF or y is INF:
        return True
    return max(abs(x), abs(y)) > R


def membership(z, n: int, tower: RationalTower, R) -> str:
    """'delta' when gamma_n(z) lies outside the bidisc B_n, else 'K'."""
    vals = tower.values(tower.to_mp(z), n)
    return "delta" if in_delta(n, vals, R) else "K"


@dataclass
class Frame:
    """Square [-h, h]^2 around a seed in its chart (z, or u = 1/z at infinity)."""

    center: Any  # mp complex, or INF for the chart at infinity
    h: Any  # mp half-width

    def point(self, x: float, y: float):
        ctx = self.h.context
        zeta = self.h * ctx.mpc(x, y)
        if self.center is INF:
            return INF if zeta == 0 else 1 / zeta
        return self.center + zeta

    def chart_coord(self, z):
        """Normalised frame coordinates of a point z (complex double)."""
        if self.center is INF:
            u = 0 if z is INF else 1 / z
            return complex(u / self.h)
        if z is INF:
            return complex(math.inf, 0)
        return complex((z - self.center) / self.h)

    def center_abs(self) -> float:
        return 0.0 if self.center is INF else float(abs(self.center))

    def spherical_upper(self):
        """Upper bound of the spherical diameter of the frame."""
        ctx = self.h.context
        diag = ctx.sqrt(2) * self.h
        m = max(ctx.mpf(self.center_abs()) - diag, ctx.zero)
        chord = 2 * (2 * diag) / (1 + m**2)
        return chord_to_angle(min(chord, ctx.mpf(2)))

    def conformal(self, zetas: np.ndarray) -> np.ndarray:
        """1 + |w|^2 at normalised offsets (double precision suffices)."""
        hf = float(self.h)
        if self.center is INF:
            return 1 + np.abs(hf * zetas) ** 2
        return 1 + np.abs(complex(self.center) + hf * zetas) ** 2


@dataclass
class ComponentBox:
    id: int
    pole: Pole
    source: int  # level of the rational function having this pole
    orientation: str
    frame: Frame
    rho: Any
    diam_lo: Any
    diam_hi: Any
    ring_slack: float  # max over the ring of max|coord| / R (< 1 required)
    parent_id: int | None = None

    @property
    def seed(self):
        return self.pole.z


@dataclass
class LevelCertificate:
    level: int
    R: float
    components: list[ComponentBox]
    failures: list[str] = field(default_factory=list)
    margins: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def counts(self) -> tuple[int, int]:
        v = sum(c.orientation == VERTICAL for c in self.components)
        return v, len(self.components) - v


def expected_counts(n: int) -> tuple[int, int]:
    """(v_n, h_n) from the Fibonacci numbers."""
    k = fibonacci(n + 1)
    km1 = k[n - 1] if n >= 1 else 0
    if n % 2 == 0:
        return km1, k[n]
    return k[n], km1


def splitting_orientation(n: int) -> str:
    """Orientation of components around poles of r_n (the ones that split)."""
    return HORIZONTAL if n % 2 == 0 else VERTICAL


def _seeds(tower: RationalTower, n: int):
    return [(p, n - 1) for p in tower.level(n - 1)] + [(p, n) for p in tower.level(n)]


def _ring(frame: Frame, per_side: int):
    t = np.linspace(-1.0, 1.0, per_side, endpoint=False)
    pts = [(x, -1.0) for x in t] + [(1.0, y) for y in t]
    pts += [(-x, 1.0) for x in t] + [(-1.0, -y) for y in t]
    return pts


def _proxy(frame: Frame, residue, R, scale):
    """Point where the Laurent term c/(z - w) has modulus scale * R."""
    ctx = frame.h.context
    zeta = residue / (ctx.mpf(scale) * R)
    if frame.center is INF:
        return 1 / zeta
    return frame.center + zeta


def level_boxes(tower: RationalTower, n: int, R) -> list[ComponentBox]:
    """One frame per point of gamma_n^{-1}(∞_2), sized from its Laurent radius."""
    ctx = tower.ctx
    Rm = ctx.mpf(R)
    seeds = _seeds(tower, n)
    near = nearest_chart_distances(ctx, [p.z for p, _ in seeds])
    comps = []
    for i, ((p, src), d) in enumerate(zip(seeds, near)):
        rho = abs(p.residue) / Rm
        h = min(BOX_FACTOR * rho, SEPARATION_FRACTION * d)
        frame = Frame(p.z, h)
        comps.append(ComponentBox(i, p, src, "", frame, rho, ctx.zero,
                                  frame.spherical_upper(), math.nan))
    return comps


def ring_points(frame: Frame, per_side: int = RING_POINTS_PER_SIDE) -> list:
    return [frame.point(x, y) for x, y in _ring(frame, per_side)]


def certify_level(tower: RationalTower, n: int, R: float, *,
                  per_side: int = RING_POINTS_PER_SIDE,
                  solution_samples: int = SOLUTION_SAMPLES,
                  random_samples: int = 256,
                  fail_fast: bool = True,
                  seed: int = 0) -> LevelCertificate:
    """Certificates (a)-(d) for the bidisc radius R at level n."""
    ctx = tower.ctx
    Rm = ctx.mpf(R)
    b = fibonacci(n + 1)[n + 1]
    bound = 1.0 / b**n
    cert = LevelCertificate(n, R, level_boxes(tower, n, R))
    comps = cert.components
    worst_sep = min(float(c.frame.h / c.rho) for c in comps)
    worst_diam = max(float(c.diam_hi / bound) for c in comps)
    cert.margins["frame_over_rho"] = worst_sep
    cert.margins["diameter_over_bound"] = worst_diam
    if worst_sep < MIN_BOX_OVER_RHO:
        cert.failures.append("separation: frames cannot hold disjoint components")
    if worst_diam >= 1.0:
        cert.failures.append(f"diameter: frame bound exceeds 1/b_n^n = {bound:.3e}")
    if fail_fast and cert.failures:
        return cert

    # (a)/(c): ring samples in K_n, proxies in Delta_n, orientation
    worst_ring = 0.0
    worst_cn = 0.0
    for c in comps:
        ring_max = 0.0
        for z in ring_points(c.frame, per_side):
            vals = tower.values(z, n)
            fx, fy = gamma_coords(n, vals)
            if fx is INF or fy is INF:
                ring_max = math.inf
                break
            ring_max = max(ring_max, float(max(abs(fx), abs(fy)) / Rm))
        c.ring_slack = ring_max
        worst_ring = max(worst_ring, ring_max)
        # orientation from the proxy at |c/(z-w)| = 2R
        fx, fy = gamma_coords(n, tower.values(_proxy(c.frame, c.pole.residue, Rm, 2), n))
        big_x = fx is INF or abs(fx) > Rm
        big_y = fy is INF or abs(fy) > Rm
        if big_x == big_y:
            cert.failures.append(f"orientation: component {c.id} proxy has big_x={big_x}, big_y={big_y}")
        c.orientation = HORIZONTAL if big_x else VERTICAL
        small = min(abs(fx) if fx is not INF else ctx.inf, abs(fy) if fy is not INF else ctx.inf)
        worst_cn = max(worst_cn, float(small / Rm))
        # two opposite proxies inside the component give a lower diameter bound
        pa = _proxy(c.frame, c.pole.residue, Rm, 1.05)
        pb = _proxy(c.frame, -c.pole.residue, Rm, 1.05)
        if in_delta(n, tower.values(pa, n), Rm) and in_delta(n, tower.values(pb, n), Rm):
            c.diam_lo = chord_to_angle(ctx.mpf(mp_chord(ctx, pa, pb)))
    cert.margins["ring_max_over_R"] = worst_ring
    if worst_ring >= 1.0:
        cert.failures.append("census: a frame boundary meets Delta_n")
    expected = expected_counts(n)
    if cert.counts() != expected:
        cert.failures.append(f"census: (v, h) = {cert.counts()} != {expected}")

    # (c) on random points of the sphere
    rng = np.random.default_rng([seed, n, 17])
    zs = random_sphere_points(rng, random_samples)
    vals = tower.values_many(zs, n)
    first, second = (vals[n - 1], vals[n]) if n % 2 else (vals[n], vals[n - 1])
    smallest = np.minimum(np.abs(first), np.abs(second))
    worst_cn = max(worst_cn, float(np.max(smallest)) / R)
    cert.margins["A_in_C_min_over_R"] = worst_cn
    if worst_cn >= 1.0:
        cert.failures.append("A_n in C_n: a sample has both coordinates of modulus >= R_n")
    if fail_fast and cert.failures:
        return cert

    if solution_samples:
        msg = _check_solutions(tower, n, Rm, solution_samples)
        if msg:
            cert.failures.append(msg)
    return cert


def _check_solutions(tower: RationalTower, n: int, Rm, count: int) -> str | None:
    """r_n(z) = a has k_n distinct solutions for sampled |a| = R."""
    ctx = tower.ctx
    poles = tower.level(n)
    near = tower.nearest_chart_distances(n)
    for s in range(count):
        a = Rm * ctx.expjpi(ctx.mpf(2 * s + 1) / count)
        for j, w in enumerate(poles):
            z = a / w.residue if w.at_infinity else w.z + w.residue / a
            offset0 = abs(w.residue / a)
            converged = False
            for _ in range(8):
                r, d = tower.values_and_derivs(z, n)
                step = (r[n] - a) / d[n]
                z = z - step
                if abs(step) <= 1e-10 * offset0 * (abs(z) ** 2 if w.at_infinity else 1):
                    converged = True
                    break
            if not converged:
                return f"solutions: Newton stalled for |a| = R_n near pole {j}"
            off = 1 / abs(z) if w.at_infinity else abs(z - w.z)
            if not off < near[j] / 2:
                return f"solutions: root for |a| = R_n escaped pole {j}"
    return None


# ----------------------------------------------------------------- quadtree
@dataclass
class Component:
    id: int
    pole: Pole
    source: int
    orientation: str
    frame: Frame
    depth: int  # finest quadtree depth
    mask: np.ndarray  # labelled pixels of the component
    interior: np.ndarray  # pixels covered by leaves entirely inside Delta_n
    leaves: list  # (level, i, j, state)
    diam_lo: Any
    diam_hi: Any
    parent_id: int | None = None

    @property
    def diameter(self):
        return (self.diam_lo, self.diam_hi)


@dataclass
class RegionDecomposition:
    level: int
    R: float
    components: list[Component]
    cell_tol: float
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def counts(self) -> tuple[int, int]:
        v = sum(c.orientation == VERTICAL for c in self.components)
        return v, len(self.components) - v

    def by_pole(self) -> dict:
        return {c.pole.index: c for c in self.components}


class ResolutionInsufficient(RuntimeError):
    pass


def _quadtree(tower, n, Rm, frame: Frame, min_depth, max_depth, cell_tol):
    """Adaptive corner-sampled quadtree on [-1, 1]^2 of the frame."""
    D = max_depth
    N = 2**D
    cache = {}

    def inside(i, j):
        key = (i, j)
        if key not in cache:
            x = -1 + 2 * i / N
            y = -1 + 2 * j / N
            cache[key] = in_delta(n, tower.values(frame.point(x, y), n), Rm)
        return cache[key]

    # spherical size of a cell at quadtree level L (upper bound)
    m = max(frame.center_abs() - math.sqrt(2) * float(frame.h), 0.0)
    unit = 2 * math.sqrt(2) * 2 * float(frame.h) / (1 + m * m)

    def size(L):
        return unit / 2**L

    leaves = []
    start = 3
    step0 = N // 2**start
    stack = [(start, i, j) for i in range(0, N, step0) for j in range(0, N, step0)]
    half = N // 2
    unresolved = False
    while stack:
        L, i, j = stack.pop()
        s = N // 2**L
        corners = [inside(i, j), inside(i + s, j), inside(i, j + s), inside(i + s, j + s)]
        contains_seed = i <= half <= i + s and j <= half <= j + s
        mixed = len(set(corners)) > 1
        if (mixed or contains_seed) and L < D and (L < min_depth or size(L) >= cell_tol):
            t = s // 2
            stack += [(L + 1, i, j), (L + 1, i + t, j), (L + 1, i, j + t), (L + 1, i + t, j + t)]
            continue
        if mixed and size(L) >= cell_tol:
            unresolved = True
        state = "in" if all(corners) else ("out" if not any(corners) and not contains_seed else "mixed")
        leaves.append((L, i, j, state))
    raster = np.zeros((N, N), dtype=bool)
    interior = np.zeros((N, N), dtype=bool)
    for L, i, j, state in leaves:
        s = N // 2**L
        if state != "out":
            raster[i:i + s, j:j + s] = True
        if state == "in":
            interior[i:i + s, j:j + s] = True
    return leaves, raster, interior, unresolved, len(cache)


def _pixel_centers(mask: np.ndarray) -> np.ndarray:
    N = mask.shape[0]
    ii, jj = np.nonzero(mask)
    return (-1 + (2 * ii + 1) / N) + 1j * (-1 + (2 * jj + 1) / N)


def _hull_points(pts: np.ndarray) -> np.ndarray:
    if len(pts) <= 3:
        return pts
    try:
        hull = ConvexHull(np.column_stack([pts.real, pts.imag]))
    except QhullError:
        return pts
    return pts[hull.vertices]


def frame_diameter(frame: Frame, pts: np.ndarray):
    """Max spherical distance between normalised frame points (mp)."""
    ctx = frame.h.context
    if len(pts) < 2:
        return ctx.zero
    pts = _hull_points(pts)
    f = frame.conformal(pts)
    diff = np.abs(pts[:, None] - pts[None, :])
    ratio = diff / np.sqrt(f[:, None] * f[None, :])
    chord = 2 * frame.h * ctx.mpf(float(ratio.max()))
    return chord_to_angle(min(chord, ctx.mpf(2)))


def decompose(n: int, tower: RationalTower, cert: LevelCertificate, *,
              min_depth: int = 5, depth_budget: int = 8) -> RegionDecomposition:
    """Quadtree decomposition of Delta_n inside the certified frames."""
    if depth_budget < 3 or min_depth > depth_budget:
        raise ValueError("need 3 <= depth_budget and min_depth <= depth_budget")
    ctx = tower.ctx
    Rm = ctx.mpf(cert.R)
    b = fibonacci(n + 1)[n + 1]
    cell_tol = (1.0 / b**n) / 64
    out = RegionDecomposition(n, cert.R, [], cell_tol)
    for box in cert.components:
        leaves, raster, interior, unresolved, _ = _quadtree(
            tower, n, Rm, box.frame, min_depth, depth_budget, cell_tol)
        if unresolved:
            out.failures.append(f"resolution-insufficient: component {box.id}")
        labels, count = ndimage.label(raster, structure=np.ones((3, 3), dtype=int))
        N = raster.shape[0]
        h = N // 2
        seed_labels = {int(labels[i, j]) for i in (h - 1, h) for j in (h - 1, h)} - {0}
        if count != 1 or len(seed_labels) != 1:
            out.failures.append(
                f"census: frame {box.id} holds {count} pieces, seed touches {len(seed_labels)}")
        mask = labels == (seed_labels.pop() if seed_labels else 1)
        if mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any():
            out.failures.append(f"census: component {box.id} reaches its frame boundary")
        depth = int(round(math.log2(N)))
        lo = frame_diameter(box.frame, _pixel_centers(mask))
        pix = chord_to_angle(min(ctx.mpf(2), 2 * box.frame.h * ctx.mpf(2 * math.sqrt(2) / N)
                                 / ctx.mpf(1 + max(box.frame.center_abs() - math.sqrt(2) * float(box.frame.h), 0) ** 2)))
        out.components.append(Component(
            box.id, box.pole, box.source, box.orientation, box.frame, depth,
            mask, interior & mask, leaves, lo, lo + 2 * pix))
    b_n = len(out.components)
    if b_n != b:
        out.failures.append(f"census: {b_n} components, expected b_n = {b}")
    if out.counts() != expected_counts(n):
        out.failures.append(f"census: (v, h) = {out.counts()} != {expected_counts(n)}")
    bound = ctx.mpf(1) / b**n
    for c in out.components:
        if not c.diam_hi < bound:
            out.failures.append(f"diameter: component {c.id} upper bound {ctx.nstr(c.diam_hi, 5)} >= 1/b_n^n")
    return out


# ---------------------------------------------------------- level to level
def _frame_contains(frame: Frame, z) -> bool:
    if frame.center is INF:
        if z is INF:
            return True
        u = 1 / z
        return max(abs(u.real), abs(u.imag)) <= frame.h
    if z is INF:
        return False
    d = z - frame.center
    return max(abs(d.real), abs(d.imag)) <= frame.h


def _sample_points(comp: Component, limit: int = 24) -> list:
    """Hull pixel centres of a component plus its seed, as mp points."""
    pts = _hull_points(_pixel_centers(comp.mask))
    if len(pts) > limit:
        pts = pts[np.linspace(0, len(pts) - 1, limit).astype(int)]
    out = [comp.frame.point(p.real, p.imag) for p in pts]
    return out


def assign_parents(tower: RationalTower, parent: RegionDecomposition,
                   child: RegionDecomposition) -> list[str]:
    """Set parent_id on the child components by containment; report problems.

    Also checks Delta_{n+1} ⊂ Delta_n on component samples and
    K_n ⊂ interior K_{n+1} on the boundary cells of Delta_n.
    """
    n = parent.level
    ctx = tower.ctx
    Rn = ctx.mpf(parent.R)
    Rn1 = ctx.mpf(child.R)
    problems = []
    for c in child.components:
        owners = [p for p in parent.components if _frame_contains(p.frame, c.pole.z)]
        if len(owners) != 1:
            problems.append(f"parent map: component {c.id} at level {child.level} has {len(owners)} candidate parents")
            continue
        par = owners[0]
        c.parent_id = par.id
        lineage = c.pole.index if c.pole.birth_level <= n else c.pole.parent
        if par.pole.index != lineage:
            problems.append(f"parent map: component {c.id} disagrees with pole lineage")
        for z in _sample_points(c):
            if not _frame_contains(par.frame, z) or not in_delta(n, tower.values(z, n), Rn):
                problems.append(f"nesting: component {c.id} leaves Delta_{n}")
                break
        # child cells may not touch the boundary cells of the parent
        N = par.mask.shape[0]
        for z in _sample_points(c, 12) + [c.pole.z]:
            w = par.frame.chart_coord(z)
            i = int(np.clip((w.real + 1) / 2 * N, 0, N - 1))
            j = int(np.clip((w.imag + 1) / 2 * N, 0, N - 1))
            if not par.interior[i, j]:
                problems.append(f"interior: component {c.id} meets a boundary cell of its parent")
                break
    # boundary cells of Delta_n, sampled on their K_n side, lie inside K_{n+1}
    for p in parent.components:
        N = 2**p.depth
        checked = 0
        for L, i, j, state in p.leaves:
            if state != "mixed" or checked >= 16:
                continue
            s = N // 2**L
            for (ci, cj) in ((i, j), (i + s, j), (i, j + s), (i + s, j + s)):
                z = p.frame.point(-1 + 2 * ci / N, -1 + 2 * cj / N)
                if in_delta(n, tower.values(z, n), Rn):
                    continue
                vals = tower.values(z, n + 1)
                fx, fy = gamma_coords(n + 1, vals)
                if fx is INF or fy is INF or not max(abs(fx), abs(fy)) < Rn1:
                    problems.append(f"K_{n} not inside K_{n + 1} near component {p.id}")
                checked += 1
                break
    for p in parent.components:
        kids = [c for c in child.components if c.parent_id == p.id]
        if not kids:
            problems.append(f"nesting: component {p.id} at level {n} has no child")
    return problems


def link_by_frames(parent, child) -> list[str]:
    """Parent ids by frame containment of the child seeds (no resampling)."""
    problems = []
    for c in child.components:
        owners = [p.id for p in parent.components if _frame_contains(p.frame, c.pole.z)]
        if len(owners) != 1:
            problems.append(f"component {c.id} at level {child.level} has {len(owners)} parents")
            c.parent_id = None
        else:
            c.parent_id = owners[0]
    return problems


def frames_disjoint(comps) -> bool:
    """Pairwise disjointness of the component frames."""
    finite = [c for c in comps if c.frame.center is not INF]
    at_inf = [c for c in comps if c.frame.center is INF]
    zs = np.array([complex(c.frame.center) for c in finite])
    hs = [c.frame.h for c in finite]
    for i, c in enumerate(finite):
        close = np.flatnonzero(np.abs(zs - zs[i]) <= 1e-6 * (1 + abs(zs[i])) + 4 * float(hs[i]))
        for j in close:
            if j <= i:
                continue
            d = finite[j].frame.center - c.frame.center
            if max(abs(d.real), abs(d.imag)) <= hs[i] + hs[j]:
                return False
    for c in at_inf:
        ctx = c.frame.h.context
        reach = 1 / (ctx.sqrt(2) * c.frame.h)
        for f in finite:
            if abs(f.frame.center) + ctx.sqrt(2) * f.frame.h >= reach:
                return False
    return True


@dataclass
class SplitReport:
    level: int
    splits: dict  # parent id -> (continuing child id, new child id)
    shrinks: dict  # parent id -> child id
    problems: list[str]

    @property
    def ok(self) -> bool:
        return not self.problems


def pair_of_pants_report(tower: RationalTower, parent: RegionDecomposition,
                         child: RegionDecomposition) -> SplitReport:
    """How components around poles of r_n split in two and the others shrink."""
    n = parent.level
    ctx = tower.ctx
    problems = []
    if any(c.parent_id is None for c in child.components):
        problems += assign_parents(tower, parent, child)
    splits, shrinks = {}, {}
    for p in parent.components:
        kids = [c for c in child.components if c.parent_id == p.id]
        if p.source == n:
            if len(kids) != 2:
                problems.append(f"component {p.id} should split in two, has {len(kids)} children")
                continue
            cont = [c for c in kids if c.pole.index == p.pole.index]
            new = [c for c in kids if c.pole.birth_level == n + 1 and c.pole.parent == p.pole.index]
            if len(cont) != 1 or len(new) != 1:
                problems.append(f"component {p.id}: children are not (itself, new pole)")
                continue
            if cont[0].orientation != p.orientation:
                problems.append(f"component {p.id}: continuing child changed orientation")
            if new[0].orientation == p.orientation:
                problems.append(f"component {p.id}: new child has the parent's orientation")
            splits[p.id] = (cont[0].id, new[0].id)
        else:
            if len(kids) != 1 or kids[0].pole.index != p.pole.index:
                problems.append(f"component {p.id} should shrink to one child, has {len(kids)}")
                continue
            shrinks[p.id] = kids[0].id
    v, h = expected_counts(n)
    k = fibonacci(n + 1)
    if len(shrinks) != (v if n % 2 == 0 else h):
        problems.append(f"shrinking count {len(shrinks)} is not {'v_n' if n % 2 == 0 else 'h_n'}")
    if len(splits) != k[n]:
        problems.append(f"splitting count {len(splits)} is not k_n = {k[n]}")
    if not frames_disjoint(child.components):
        problems.append("level n+1 components are not pairwise disjoint")
    # new components sit where |r_n - a_{n+1}| < eps_{n+1} / R_{n+1}
    a = ctx.mpc(tower.schedule.a[n + 1])
    eps = ctx.mpf(tower.schedule.eps[n + 1])
    R1 = ctx.mpf(child.R)
    for _, new_id in splits.values():
        c = child.components[new_id]
        z = _proxy(c.frame, c.pole.residue, R1, 2)
        rn = tower.values(z, n)[n]
        if rn is INF or not abs(rn - a) < eps / R1:
            problems.append(f"component {new_id}: |r_n - a_(n+1)| >= eps_(n+1)/R_(n+1) inside")
    return SplitReport(n, splits, shrinks, problems)
