"""The full invariant suite, run against a saved construction state."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from . import cantor, embedding, oracle, regions
from .sphere import mp_distance
from .state import ConstructionState
from .tower import MultiplePoleSuspected, fibonacci

ORACLE_LEVELS = 8
QUADTREE_LEVELS = 8


@dataclass
class Entry:
    name: str
    ok: bool
    level: int | None = None
    detail: str = ""


@dataclass
class Report:
    entries: list = field(default_factory=list)

    def add(self, name, ok, level=None, detail=""):
        self.entries.append(Entry(name, bool(ok), level, detail))

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def first_failure(self) -> Entry | None:
        return next((e for e in self.entries if not e.ok), None)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": [asdict(e) for e in self.entries]}

    def summary(self) -> str:
        lines = []
        for e in self.entries:
            where = "" if e.level is None else f" [n={e.level}]"
            lines.append(f"{'PASS' if e.ok else 'FAIL'} {e.name}{where} {e.detail}".rstrip())
        lines.append(f"overall: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines)


def parse_levels(text: str | None, depth: int) -> list[int]:
    """'2..4', '3', '1,5,7' or None (all levels)."""
    if not text:
        return list(range(1, depth + 1))
    out = set()
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out |= set(range(int(lo), int(hi) + 1))
        else:
            out.add(int(part))
    bad = [n for n in out if not 1 <= n <= depth]
    if bad:
        raise ValueError(f"levels {sorted(bad)} outside 1..{depth}")
    return sorted(out)


def _stored_checks(state: ConstructionState, tower, report: Report, levels):
    stored = state.stored_levels()
    k = fibonacci(state.depth)
    counts_ok = len(stored) == state.depth + 1 and all(
        len(stored[n]) == k[n] for n in range(len(stored)))
    bad = [n for n in range(len(stored)) if len(stored[n]) != k[n]]
    report.add("fibonacci-count", counts_ok, detail=f"mismatched levels {bad}" if bad else "")
    if not counts_ok:
        return False
    ctx = tower.ctx
    worst = ctx.zero
    for n in levels:
        for rec, p in zip(stored[n], tower.level(n)):
            if rec["index"] != p.index or (rec["z"] is None) != p.at_infinity:
                report.add("pole-agreement", False, n, f"pole {rec['index']} differs in kind")
                return False
            if rec["z"] is not None:
                z = ctx.mpc(ctx.mpf(rec["z"][0]), ctx.mpf(rec["z"][1]))
                worst = max(worst, mp_distance(ctx, z, p.z))
    report.add("pole-agreement", worst <= tower.resolution(),
               detail=f"max stored/replayed gap {ctx.nstr(worst, 3)}")
    return True


def _tower_checks(tower, report: Report, levels):
    ctx = tower.ctx
    for n in levels:
        poles = tower.level(n)
        nonzero = all(p.residue != 0 for p in poles)
        report.add("residues-nonzero", nonzero, n)
        sep = tower.min_separation(n)
        report.add("poles-distinct", sep > tower.resolution(), n,
                   f"min separation {ctx.nstr(sep, 3)}")
        if n + 1 <= tower.depth:
            cross = tower.min_cross_distance(n, n + 1)
            report.add("consecutive-disjoint", cross > tower.resolution(), n,
                       f"min distance {ctx.nstr(cross, 3)}")
        if n + 2 <= tower.depth:
            nested = set(tower.levels[n]) <= set(tower.levels[n + 2])
            report.add("pole-nesting", nested, n)
        worst = max(float(tower.laurent_check(n, p)) for p in poles)
        report.add("laurent", worst < 0.01, n, f"worst {worst:.2e}")


def _oracle_checks(tower, report: Report, levels, points):
    top = min(max(levels), ORACLE_LEVELS, tower.depth)
    if top < 1:
        return
    orc = oracle.oracle_expand(tower, top)
    for n in levels:
        if n > top:
            continue
        gap, match = oracle.oracle_agreement(tower, orc, n, points)
        degree_ok = orc.levels[n].pole_count == fibonacci(n)[n]
        report.add("oracle", gap < 1e-9 and match < 1e-8 and degree_ok, n,
                   f"eval gap {gap:.1e}, root match {match:.1e}")


def _region_checks(state, tower, report, levels, certs, decs):
    sched = state.schedule
    for n in levels:
        cert = regions.certify_level(tower, n, sched.R[n], seed=sched.seed)
        certs[n] = cert
        report.add("region-certificate", cert.ok, n, "; ".join(cert.failures))
        if n <= QUADTREE_LEVELS:
            dec = regions.decompose(n, tower, cert)
            decs[n] = dec
            report.add("region-census", not [f for f in dec.failures if "census" in f], n,
                       f"{len(dec.components)} components, (v, h) = {dec.counts()}")
            report.add("diameter-bound", not [f for f in dec.failures if "diameter" in f], n)
    for n in levels:
        if n + 1 in decs and n in decs:
            rep = regions.pair_of_pants_report(tower, decs[n], decs[n + 1])
            report.add("pair-of-pants", rep.ok, n, "; ".join(rep.problems[:2]))


def _cantor_checks(tower, report, certs):
    if not certs:
        return
    approxes = [cantor.build_approx(N, tower, certs) for N in sorted(certs)]
    for a in approxes:
        report.add("cantor-witnesses", a.ok, a.depth, "; ".join(a.problems[:2]))
    rows, verdicts = cantor.dimension_trend([a for a in approxes if a.depth >= 2],
                                            epsilons=(1.0, 0.5, 0.25))
    for eps, good in verdicts.items():
        report.add(f"hausdorff-trend eps={eps}", good)
    props = cantor.cantor_property_report(approxes[-1], certs)
    report.add("cantor-properties", props.ok, detail="; ".join(props.details[:2]))


def _embedding_checks(tower, sched, report, levels, samples):
    c = embedding.cauchy_check(tower, sched, k_range=[k for k in levels if k < sched.depth],
                               samples=samples)
    bad = [r for r in c.rows if not r[4]]
    report.add("cauchy", c.ok, detail=f"{len(c.rows)} (k, n) pairs, {len(bad)} violations")
    ns = [n for n in levels if n >= 3]
    if ns:
        p = embedding.properness_check(tower, sched, ns)
        report.add("properness", p.ok, detail=f"margins {[f'{r[2]:.3g}' for r in p.rows]}")
    for n in levels:
        report.add("injectivity", embedding.injectivity_check(tower, sched, n).ok, n)
        report.add("A_n-in-C_n", embedding.a_in_c_check(tower, sched, n, samples).ok, n)
        report.add("gamma(K_n)-in-B_n", embedding.mid_check(tower, sched, n).ok, n)
    report.add("preimage-chain", embedding.preimage_chain_check(tower).ok)


def run_suite(state: ConstructionState, levels: list[int] | None = None,
              samples: int = embedding.DEFAULT_SAMPLES, oracle_points: int = 200) -> Report:
    report = Report()
    levels = levels or list(range(1, state.depth + 1))
    violations = state.schedule.violations()
    report.add("schedule-invariants", not violations, detail="; ".join(violations[:3]))
    try:
        tower = state.replay_tower()
    except (ArithmeticError, MultiplePoleSuspected) as exc:
        report.add("tower-replay", False, detail=str(exc))
        return report
    if not _stored_checks(state, tower, report, levels):
        return report
    _tower_checks(tower, report, levels)
    _oracle_checks(tower, report, levels, oracle_points)
    certs, decs = {}, {}
    _region_checks(state, tower, report, levels, certs, decs)
    _cantor_checks(tower, report, certs)
    _embedding_checks(tower, state.schedule, report, levels, samples)
    return report


__all__ = ["run_suite", "parse_levels", "Report", "Entry"]
