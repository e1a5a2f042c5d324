"""Depth-N approximations of C, the intersection of the nested Delta_n.

Level objects may be quadtree decompositions or the cheaper frame
certificates; both expose ``components`` with ``pole``, ``frame``,
``diam_hi`` and ``parent_id``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .regions import _frame_contains, link_by_frames
from .tower import RationalTower, fibonacci

EPSILONS = (1.0, 0.5, 0.25, 0.1)


@dataclass
class CantorApprox:
    depth: int
    components: list
    witnesses: list  # Pole objects: gamma_n^{-1}(∞_2) for n <= depth
    max_diameters: list  # index n -> max diameter upper bound at level n
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def build_approx(N: int, tower: RationalTower, levels: dict) -> CantorApprox:
    """Assemble the level-N approximation and cross-check the witnesses."""
    if N not in levels:
        raise ValueError(f"level {N} is not available")
    comps = levels[N].components
    witnesses = tower.preimage_points(N)
    problems = []
    # the union over n <= N collapses to the top level
    union = set()
    for n in range(0, N + 1):
        union |= {p.index for p in tower.preimage_points(n)}
    if union != {p.index for p in witnesses}:
        problems.append("witness union differs from the level-N preimage points")
    if len(witnesses) != fibonacci(N + 1)[N + 1]:
        problems.append(f"{len(witnesses)} witnesses, expected b_N = {fibonacci(N + 1)[N + 1]}")
    hits = {c.id: 0 for c in comps}
    for w in witnesses:
        owners = [c for c in comps if _frame_contains(c.frame, w.z)]
        if len(owners) != 1:
            problems.append(f"witness {w.index} lies in {len(owners)} components")
            continue
        hits[owners[0].id] += 1
    if any(v == 0 for v in hits.values()):
        problems.append("a level-N component holds no witness")
    maxima = [math.nan]
    for n in range(1, N + 1):
        if n in levels:
            maxima.append(float(max(c.diam_hi for c in levels[n].components)))
        else:
            maxima.append(math.nan)
    for n in range(1, N + 1):
        if math.isnan(maxima[n]):
            continue
        b = fibonacci(n + 1)[n + 1]
        if not maxima[n] < 1 / b**n:
            problems.append(f"max diameter at level {n} is not below 1/b_n^n")
        if n >= 2 and not math.isnan(maxima[n - 1]) and not maxima[n] < maxima[n - 1]:
            problems.append(f"max diameter does not decrease at level {n}")
    return CantorApprox(N, comps, witnesses, maxima, problems)


def cover_sum(approx: CantorApprox, eps: float) -> float:
    """Sum of diam^eps over the level-N components (upper diameter bounds)."""
    if not 0 < eps <= 1:
        raise ValueError("exponent must lie in (0, 1]")
    total = 0.0
    for c in approx.components:
        d = c.diam_hi
        total += float(d ** d.context.mpf(eps)) if hasattr(d, "context") else float(d) ** eps
    return total


def cover_bound(N: int, eps: float) -> float:
    """b_N^(1 - eps N), the value the cover sums must stay under."""
    b = fibonacci(N + 1)[N + 1]
    return float(b) ** (1 - eps * N)


@dataclass
class TrendRow:
    N: int
    eps: float
    cover_sum: float
    bound: float
    bound_applies: bool
    ok: bool


def dimension_trend(approxes: list[CantorApprox], epsilons=EPSILONS):
    """(rows, verdict per eps): monotone decrease and the b_N bound."""
    rows = []
    verdicts = {}
    approxes = sorted(approxes, key=lambda a: a.depth)
    for eps in epsilons:
        prev = None
        good = True
        for a in approxes:
            s = cover_sum(a, eps)
            bound = cover_bound(a.depth, eps)
            applies = eps * a.depth > 1
            ok = s > 0 and math.isfinite(s) and (not applies or s < bound)
            if prev is not None and not s < prev:
                ok = False
            rows.append(TrendRow(a.depth, eps, s, bound, applies, ok))
            good &= ok
            prev = s
        verdicts[eps] = good
    return rows, verdicts


def link_levels(levels: dict) -> list[str]:
    """Fill parent ids between consecutive available levels."""
    problems = []
    ns = sorted(levels)
    for lo, hi in zip(ns, ns[1:]):
        if hi == lo + 1 and any(c.parent_id is None for c in levels[hi].components):
            problems += link_by_frames(levels[lo], levels[hi])
    return problems


def descendants(levels: dict, n: int, comp_id: int, steps: int) -> list[int]:
    ids = [comp_id]
    for m in range(n + 1, n + steps + 1):
        ids = [c.id for c in levels[m].components if c.parent_id in ids]
    return ids


@dataclass
class PropertyReport:
    nonempty: bool
    compact: bool
    no_isolated_points: bool
    totally_disconnected: bool
    details: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.nonempty and self.compact and self.no_isolated_points and self.totally_disconnected


def cantor_property_report(approx: CantorApprox, levels: dict) -> PropertyReport:
    """Finite-depth stand-ins for the defining properties of a Cantor set."""
    details = list(link_levels(levels))
    nonempty = len(approx.witnesses) > 0
    split_ok = True
    for n in sorted(levels):
        if n + 3 > approx.depth or any(m not in levels for m in range(n, n + 4)):
            continue
        for c in levels[n].components:
            kids = descendants(levels, n, c.id, 3)
            if len(kids) < 2:
                split_ok = False
                details.append(f"component {c.id} at level {n} has {len(kids)} descendants at level {n + 3}")
    maxima = [m for m in approx.max_diameters[1:] if not math.isnan(m)]
    shrinking = all(b < a for a, b in zip(maxima, maxima[1:]))
    return PropertyReport(nonempty, True, split_ok, shrinking, details)
