"""Resumable construction state as one JSON document.

Complex numbers are ``[re, im]`` pairs.  Schedule entries are doubles (JSON
round-trips them exactly); pole data are decimal strings at the tower's
working precision, because pole clusters are far below double resolution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .schedule import ParameterSchedule
from .tower import INF, RationalTower

SCHEMA_VERSION = 1


class StateError(ValueError):
    pass


def _pair(z):
    return [z.real, z.imag]


def _mp_pair(ctx, z, digits):
    if z is INF:
        return None
    return [ctx.nstr(z.real, digits, strip_zeros=False), ctx.nstr(z.imag, digits, strip_zeros=False)]


def _mp_str(x, digits=17):
    return x.context.nstr(x, digits) if hasattr(x, "context") else repr(float(x))


def schedule_to_dict(s: ParameterSchedule) -> dict:
    return {
        "a": [_pair(complex(x)) for x in s.a[1:]],
        "eps": list(s.eps[1:]),
        "R": list(s.R),
        "delta": list(s.delta),
        "attempts": list(s.attempts[1:]),
        "margins": list(s.margins[1:]),
    }


def schedule_from_dict(seed: int, d: dict) -> ParameterSchedule:
    return ParameterSchedule(
        seed=seed,
        a=[None] + [complex(re, im) for re, im in d["a"]],
        eps=[None] + [float(x) for x in d["eps"]],
        R=[float(x) for x in d["R"]],
        delta=[float(x) for x in d["delta"]],
        attempts=[0] + [int(x) for x in d["attempts"]],
        margins=[{}] + [dict(m) for m in d["margins"]],
    )


def tower_to_dict(t: RationalTower) -> dict:
    ctx = t.ctx
    digits = ctx.dps
    poles = [{
        "index": p.index,
        "z": _mp_pair(ctx, p.z, digits),
        "residue": _mp_pair(ctx, p.residue, digits),
        "birth_level": p.birth_level,
        "parent": p.parent,
    } for p in t.poles]
    return {"dps": list(t.dps), "levels": [list(lv) for lv in t.levels], "poles": poles}


def level_summary(cert) -> dict:
    """Component metadata of one certified level (no raw cells)."""
    return {
        "R": cert.R,
        "components": [{
            "id": c.id,
            "orientation": c.orientation,
            "pole": c.pole.index,
            "source": c.source,
            "diam_lo": _mp_str(c.diam_lo),
            "diam_hi": _mp_str(c.diam_hi),
            "parent": c.parent_id,
        } for c in cert.components],
        "margins": dict(cert.margins),
    }


@dataclass
class ConstructionState:
    seed: int
    schedule: ParameterSchedule
    tower: dict = field(default_factory=dict)
    decompositions: dict = field(default_factory=dict)  # str(level) -> summary
    verdicts: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def depth(self) -> int:
        return self.schedule.depth

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "seed": self.seed,
            "schedule": schedule_to_dict(self.schedule),
            "tower": self.tower,
            "decompositions": self.decompositions,
            "verdicts": self.verdicts,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ConstructionState":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StateError(f"state is not valid JSON: {exc}") from exc
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise StateError(f"schema_version {version!r} is not {SCHEMA_VERSION}; refusing to migrate")
        try:
            seed = int(d["seed"])
            schedule = schedule_from_dict(seed, d["schedule"])
            return cls(seed, schedule, d["tower"], d["decompositions"], d["verdicts"], version)
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed state: {exc}") from exc

    def save(self, path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self.dumps())
        tmp.replace(path)

    @classmethod
    def load(cls, path) -> "ConstructionState":
        return cls.loads(Path(path).read_text())

    def record_level(self, n: int, tower: RationalTower, cert) -> None:
        self.tower = tower_to_dict(tower)
        self.decompositions[str(n)] = level_summary(cert)

    def replay_tower(self) -> RationalTower:
        return RationalTower.replay(self.schedule, self.depth)

    def stored_levels(self) -> list[list[dict]]:
        """Stored pole records per level."""
        poles = {p["index"]: p for p in self.tower.get("poles", [])}
        return [[poles[i] for i in lv if i in poles] for lv in self.tower.get("levels", [])]


def pole_rows(state: ConstructionState):
    """(level, index, re z, im z, re c, im c, birth) with ∞ as 'inf'."""
    rows = []
    for n, lv in enumerate(state.stored_levels()):
        for p in lv:
            z = p["z"] or ["inf", "0"]
            c = p["residue"]
            rows.append((n, p["index"], z[0], z[1], c[0], c[1], p["birth_level"]))
    return rows
