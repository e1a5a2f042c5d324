"""CSV tables and SVG figures.

CSV columns (numbers with 17 significant digits):

==========  ===============================================================
poles       level, index, re_z, im_z, re_residue, im_residue, birth_level
schedule    n, re_a, im_a, eps, R, delta
components  level, id, orientation, diam_lo, diam_hi, parent, pole, source
hausdorff   N, eps, cover_sum, bound, bound_applies, ok
witnesses   index, re_z, im_z, birth_level
residuals   k, n, max_residual, bound, ok
==========  ===============================================================

The point at infinity is written as ``inf`` in ``re_z`` with ``im_z = 0``.
"""

from __future__ import annotations

import csv
import io
import math

import mpmath
import numpy as np

from .cantor import build_approx, dimension_trend
from .embedding import cauchy_check, gamma_float
from .regions import (HORIZONTAL, certify_level, decompose, gamma_coords,
                      level_boxes)
from .sphere import random_sphere_points
from .state import ConstructionState, pole_rows
from .tower import INF

TABLES = ("poles", "schedule", "components", "hausdorff", "witnesses", "residuals")
TARGETS = ("regions", "cantor", "curve")
COLORS = {HORIZONTAL: "#c0392b", "vertical": "#2471a3"}


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if hasattr(x, "context"):
        return x.context.nstr(x, 17)
    return format(float(x), ".17g")


def _sig17(text: str) -> str:
    """Re-round a long decimal string to 17 significant digits."""
    if text in ("inf", "0"):
        return text
    with mpmath.workdps(40):
        return mpmath.nstr(mpmath.mpf(text), 17)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def table(state: ConstructionState, what: str, tower=None, approxes=None) -> str:
    if what not in TABLES:
        raise ValueError(f"unknown table {what!r}; choose from {', '.join(TABLES)}")
    s = state.schedule
    if what == "poles":
        rows = [(n, i, _sig17(zr), _sig17(zi), _sig17(cr), _sig17(ci), b)
                for n, i, zr, zi, cr, ci, b in pole_rows(state)]
        return _csv(["level", "index", "re_z", "im_z", "re_residue", "im_residue", "birth_level"], rows)
    if what == "schedule":
        rows = [(n, complex(s.a[n]).real, complex(s.a[n]).imag, s.eps[n], s.R[n], s.delta[n])
                for n in range(1, s.depth + 1)]
        return _csv(["n", "re_a", "im_a", "eps", "R", "delta"], rows)
    if what == "components":
        rows = []
        for key in sorted(state.decompositions, key=int):
            for c in state.decompositions[key]["components"]:
                rows.append((int(key), c["id"], c["orientation"], c["diam_lo"], c["diam_hi"],
                             c["parent"], c["pole"], c["source"]))
        return _csv(["level", "id", "orientation", "diam_lo", "diam_hi", "parent", "pole", "source"], rows)
    if what == "witnesses":
        rows = []
        top = state.stored_levels()
        seen = set()
        for lv in top[-2:]:
            for p in lv:
                if p["index"] in seen:
                    continue
                seen.add(p["index"])
                z = p["z"] or ["inf", "0"]
                rows.append((p["index"], _sig17(z[0]), _sig17(z[1]), p["birth_level"]))
        rows.sort(key=lambda r: r[0])
        return _csv(["index", "re_z", "im_z", "birth_level"], rows)
    tower = tower or state.replay_tower()
    if what == "residuals":
        rows = [r for r in cauchy_check(tower, s).rows if r[1] is not None]
        return _csv(["k", "n", "max_residual", "bound", "ok"], rows)
    if approxes is None:
        certs = {n: certify_level(tower, n, s.R[n], seed=s.seed, solution_samples=0)
                 for n in range(1, s.depth + 1)}
        approxes = [build_approx(N, tower, certs) for N in range(2, s.depth + 1)]
    rows, _ = dimension_trend(approxes)
    return _csv(["N", "eps", "cover_sum", "bound", "bound_applies", "ok"],
                [(r.N, r.eps, r.cover_sum, r.bound, r.bound_applies, r.ok) for r in rows])


# ------------------------------------------------------------------- SVG
class Svg:
    def __init__(self, width, height):
        self.w, self.h = width, height
        self.parts = []

    def add(self, text):
        self.parts.append(text)

    def rect(self, x, y, w, h, fill="none", stroke="none", cls=None, width=1.0):
        c = f' class="{cls}"' if cls else ""
        self.add(f'<rect{c} x="{x:.3f}" y="{y:.3f}" width="{w:.3f}" height="{h:.3f}" '
                 f'fill="{fill}" stroke="{stroke}" stroke-width="{width:.2f}"/>')

    def circle(self, x, y, r, fill, cls=None, stroke="none"):
        c = f' class="{cls}"' if cls else ""
        self.add(f'<circle{c} cx="{x:.3f}" cy="{y:.3f}" r="{r:.3f}" fill="{fill}" stroke="{stroke}"/>')

    def text(self, x, y, s, size=11):
        self.add(f'<text x="{x:.1f}" y="{y:.1f}" font-size="{size}" font-family="sans-serif">{s}</text>')

    def polyline(self, pts, stroke, cls=None):
        c = f' class="{cls}"' if cls else ""
        path = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
        self.add(f'<polyline{c} points="{path}" fill="none" stroke="{stroke}" stroke-width="1"/>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        return "\n".join([head, f'<rect width="{self.w}" height="{self.h}" fill="white"/>']
                         + self.parts + ["</svg>"]) + "\n"


def render_regions(state: ConstructionState, n: int, tower=None, panel: int = 160) -> str:
    """One panel per component of Delta_n (local frame, cells coloured by
    orientation) and one log-modulus panel with the bidisc square."""
    tower = tower or state.replay_tower()
    s = state.schedule
    cert = certify_level(tower, n, s.R[n], seed=s.seed, solution_samples=0)
    comps = decompose(n, tower, cert).components if n <= 8 else cert.components
    cols = min(len(comps) + 1, 6)
    rows = math.ceil((len(comps) + 1) / cols)
    pad = 24
    svg = Svg(cols * (panel + pad) + pad, rows * (panel + pad + 14) + pad)
    # log-modulus panel: images of frame rings and random points, B_n as a square
    ox, oy = pad, pad + 14
    top = math.log10(1 + s.R[n]) * 1.6
    scale = panel / top
    svg.text(ox, oy - 4, f"log10(1+|x|), log10(1+|y|); B_{n} square")
    svg.rect(ox, oy, panel, panel, stroke="#888")
    side = math.log10(1 + s.R[n]) * scale
    svg.rect(ox, oy + panel - side, side, side, stroke="black", cls="bidisc", width=1.5)
    rng = np.random.default_rng([s.seed, n, 5])
    zs = random_sphere_points(rng, 400)
    xs, ys = gamma_float(tower, zs, n)
    pts = [(complex(x), complex(y)) for x, y in zip(xs, ys)]
    for box in level_boxes(tower, n, s.R[n]):
        for x, y in (0.0, 0.5), (0.5, 0.0), (0.0, -0.5), (-0.5, 0.0):
            fx, fy = gamma_coords(n, tower.values(box.frame.point(x, y), n))
            if fx is not INF and fy is not INF:
                pts.append((complex(fx), complex(fy)))
    for x, y in pts:
        if not (np.isfinite(x) and np.isfinite(y)):
            continue
        u = min(math.log10(1 + abs(x)), top) * scale
        v = min(math.log10(1 + abs(y)), top) * scale
        svg.circle(ox + u, oy + panel - v, 1.2, "#555")
    for idx, c in enumerate(comps, start=1):
        ox = pad + (idx % cols) * (panel + pad)
        oy = pad + 14 + (idx // cols) * (panel + pad + 14)
        svg.text(ox, oy - 4, f"U{c.id} {c.orientation[0]} pole {c.pole.index}")
        svg.rect(ox, oy, panel, panel, stroke="#888")
        color = COLORS.get(c.orientation, "#777")
        leaves = getattr(c, "leaves", None)
        if leaves is None:
            svg.circle(ox + panel / 2, oy + panel / 2, panel / 4, color, cls=f"component {c.orientation}")
            continue
        N = 2 ** c.depth
        cell = panel / N
        svg.add(f'<g class="component {c.orientation}">')
        for L, i, j, state_ in sorted(leaves):
            if state_ == "out":
                continue
            size = N // 2 ** L
            fill = color if state_ == "in" else "#bbbbbb"
            svg.rect(ox + i * cell, oy + panel - (j + size) * cell, size * cell, size * cell, fill=fill)
        svg.add("</g>")
    return svg.render()


def _disc(z):
    """C̄ onto the unit disc model used for the overview pictures."""
    if z is INF:
        return 0.0, 1.0
    z = complex(z)
    r = abs(z)
    if r == 0:
        return 0.0, 0.0
    return (z.real / (1 + r), z.imag / (1 + r))


def render_cantor(state: ConstructionState, tower=None, size: int = 480) -> str:
    """Witness points and component hulls at the deepest level."""
    tower = tower or state.replay_tower()
    N = state.depth
    s = state.schedule
    cert = certify_level(tower, N, s.R[N], seed=s.seed, solution_samples=0)
    svg = Svg(size, size + 20)
    c0 = size / 2
    rad = size / 2 - 10
    svg.text(8, size + 14, f"depth {N}: {len(tower.preimage_points(N))} witness points, z / (1 + |z|)")
    svg.circle(c0, c0, rad, "none", stroke="#888")
    for comp in cert.components:
        x, y = _disc(comp.pole.z)
        r = max(float(comp.diam_hi) * rad, 1.5)
        svg.circle(c0 + x * rad, c0 - y * rad, r, "none", cls="hull", stroke=COLORS[comp.orientation])
    for p in tower.preimage_points(N):
        x, y = _disc(p.z)
        svg.circle(c0 + x * rad, c0 - y * rad, 1.5, "black", cls="witness")
    return svg.render()


def render_curve(state: ConstructionState, n: int, tower=None, radius: float = 0.5,
                 points: int = 400, size: int = 320) -> str:
    """gamma_n on the circle |z| = radius, in the two coordinate planes."""
    tower = tower or state.replay_tower()
    t = np.linspace(0, 2 * np.pi, points)
    zs = radius * np.exp(1j * t)
    xs, ys = gamma_float(tower, zs, n)
    svg = Svg(2 * size + 30, size + 30)
    for k, (vals, label) in enumerate(((xs, "first coordinate"), (ys, "second coordinate"))):
        ox = 10 + k * (size + 10)
        svg.rect(ox, 10, size, size, stroke="#888")
        svg.text(ox, size + 24, f"gamma_{n}, {label}")
        span = max(float(np.max(np.abs(vals.real - vals.real.mean()))),
                   float(np.max(np.abs(vals.imag - vals.imag.mean()))), 1e-300)
        cx, cy = vals.real.mean(), vals.imag.mean()
        pts = [(ox + size / 2 + (v.real - cx) / span * size * 0.45,
                10 + size / 2 - (v.imag - cy) / span * size * 0.45) for v in vals]
        svg.polyline(pts, "#1f618d", cls="curve")
    return svg.render()
