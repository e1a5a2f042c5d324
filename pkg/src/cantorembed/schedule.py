"""Choice of a_n, eps_n, R_n and the stability constants delta_n.

Order per level n: a_n, eps_n, poles of r_n, R_n (ladder certified by
``regions.certify_level``), delta_n.  Everything random is drawn from
``numpy.random.default_rng([seed, n, attempt])`` so a schedule is a pure
function of the seed.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .regions import LevelCertificate, certify_level, link_by_frames
from .tower import (GenericityFailure, MultiplePoleSuspected, PoleCollision,
                    RationalTower)

DEFAULT_SEED = 7
SEED_ENV = "CANTOR_SEED"
EPS_SAFETY = 0.5
LADDER_MAX = 60
MAX_RETRIES = 20
PERTURBATION = 1e-6
DELTA_0 = 0.25


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw not in (None, "") else DEFAULT_SEED


class ConstructionFailure(RuntimeError):
    def __init__(self, level: int, reason: str):
        super().__init__(f"level {level}: {reason}")
        self.level = level
        self.reason = reason


@dataclass
class ParameterSchedule:
    """Index 0 of ``a`` and ``eps`` is unused; R[0] = 0 stands for B_0 = {0}."""

    seed: int = DEFAULT_SEED
    a: list = field(default_factory=lambda: [None])
    eps: list = field(default_factory=lambda: [None])
    R: list = field(default_factory=lambda: [0.0])
    delta: list = field(default_factory=lambda: [DELTA_0])
    attempts: list = field(default_factory=lambda: [0])
    margins: list = field(default_factory=lambda: [{}])

    @property
    def depth(self) -> int:
        return len(self.R) - 1

    def truncated(self, depth: int) -> "ParameterSchedule":
        k = depth + 1
        return ParameterSchedule(self.seed, self.a[:k], self.eps[:k], self.R[:k],
                                 self.delta[:k], self.attempts[:k], self.margins[:k])

    def violations(self) -> list[str]:
        """Inequalities the schedule must satisfy; empty when all hold."""
        out = []
        for n in range(1, self.depth + 1):
            an = abs(self.a[n])
            if not self.R[n - 1] < an < self.R[n]:
                out.append(f"R_{n-1} < |a_{n}| < R_{n} fails")
            if n >= 2 and not an > math.sqrt(2) * self.R[n - 1] + 0.5:
                out.append(f"|a_{n}| <= sqrt2 R_{n-1} + 1/2")
            if not self.eps[n] > 0:
                out.append(f"eps_{n} not positive")
            if n >= 2 and not self.eps[n] < self.eps[n - 1]:
                out.append(f"eps_{n} not below eps_{n-1}")
            if not self.delta[n] < self.delta[n - 1]:
                out.append(f"delta_{n} not below delta_{n-1}")
            if self.eps[n] >= epsilon_bound(n, self.a, self.R, self.delta):
                out.append(f"eps_{n} violates the shear estimate")
        if self.delta[0] != DELTA_0:
            out.append("delta_0 != 1/4")
        return out


@dataclass(frozen=True)
class ShearMap:
    """f_n: shear of the second coordinate for odd n, of the first for even n."""

    parity: str
    a: complex
    eps: float

    @classmethod
    def of_level(cls, n: int, schedule: ParameterSchedule) -> "ShearMap":
        return cls("odd" if n % 2 else "even", complex(schedule.a[n]), float(schedule.eps[n]))

    def g(self, u):
        return self.eps / (u - self.a)

    def __call__(self, x, y):
        if self.parity == "odd":
            return x, y + self.g(x)
        return x + self.g(y), y

    def sup_displacement(self, radius: float) -> float:
        """sup of |f - id| over the closed bidisc of the given radius."""
        gap = abs(self.a) - radius
        if gap <= 0:
            return math.inf
        return self.eps / gap


def epsilon_bound(n: int, a, R, delta) -> float:
    """min over j < n of delta_j 2^-(j+n) (|a_n| - R_j - 1/2)."""
    an = abs(a[n])
    best = math.inf
    for j in range(n):
        gap = an - (R[j] if j else 0.0) - 0.5
        if gap <= 0:
            raise ConstructionFailure(n, f"|a_{n}| - R_{j} - 1/2 <= 0")
        best = min(best, delta[j] * 2.0 ** -(j + n) * gap)
    return best


def choose_epsilon(n: int, schedule: ParameterSchedule, delta=None) -> float:
    delta = schedule.delta if delta is None else delta
    eps = EPS_SAFETY * epsilon_bound(n, schedule.a, schedule.R, delta)
    if n >= 2 and eps >= schedule.eps[n - 1]:
        eps = schedule.eps[n - 1] / 2
    return eps


def a_modulus(R_prev: float) -> float:
    """sqrt2 R + 1, moved up to a double that strictly exceeds sqrt2 R + 1/2."""
    floor = math.sqrt(2) * R_prev + 0.5
    mod = math.sqrt(2) * R_prev + 1
    while not mod > floor:
        mod = math.nextafter(mod, math.inf)
    return mod


def choose_a(n: int, R_prev: float, seed: int, attempt: int = 0) -> complex:
    """a_n = (sqrt2 R_{n-1} + 1) e^{i theta}; retries only nudge the phase."""
    if n == 1:
        base = 1.0 + 0j
    else:
        theta = 2 * math.pi * np.random.default_rng([seed, n, 0]).random()
        base = a_modulus(R_prev) * cmath.exp(1j * theta)
    if attempt:
        u = np.random.default_rng([seed, n, attempt]).uniform(-1, 1)
        base *= cmath.exp(1j * PERTURBATION * u)
    if n > 1:
        # rounding of the complex product must not undo the strict bound
        floor = math.sqrt(2) * R_prev + 0.5
        while not abs(base) > floor:
            base *= 1 + 2.0**-52
    return base


def choose_R(n: int, tower: RationalTower, schedule: ParameterSchedule,
             ladder_max: int = LADDER_MAX) -> tuple[float, LevelCertificate]:
    """Smallest R = |a_n| 2^m (m >= 1) passing every region certificate."""
    an = abs(schedule.a[n])
    last = None
    for m in range(1, ladder_max + 1):
        R = an * 2.0**m
        cert = certify_level(tower, n, R, seed=schedule.seed)
        if cert.ok:
            return R, cert
        last = cert
    raise ConstructionFailure(n, "R ladder exhausted: " + "; ".join(last.failures))


def choose_delta(n: int, tower: RationalTower, schedule: ParameterSchedule,
                 samples: int = 400) -> tuple[float, float]:
    """(delta_n, sigma_n) with sigma_n the sampled injectivity margin on K_{n-1}."""
    from .embedding import injectivity_margin, sample_K

    rng = np.random.default_rng([schedule.seed, n, 99])
    if n == 1:
        # K_0 is empty; any finite sample still illustrates sigma_1
        pts = None
    else:
        pts = sample_K(tower, schedule, n - 1, samples, rng)
    sigma = injectivity_margin(tower, n, pts, rng, samples)
    if not sigma > 0:
        raise ConstructionFailure(n, "injectivity margin is not positive")
    return min(schedule.delta[n - 1] / 2, sigma / 4), sigma


@dataclass
class BuildResult:
    schedule: ParameterSchedule
    tower: RationalTower
    certificates: dict


def build(depth: int, seed: int | None = None, *, schedule: ParameterSchedule | None = None,
          on_level: Callable | None = None, delta_samples: int = 400) -> BuildResult:
    """Interleaved construction up to ``depth``; resumes from ``schedule``."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if schedule is None:
        schedule = ParameterSchedule(seed=default_seed() if seed is None else seed)
    start = schedule.depth
    certificates = {}
    tower = RationalTower.replay(schedule, start) if start >= 1 else None
    if 1 <= start < depth:
        certificates[start] = certify_level(tower, start, schedule.R[start],
                                            seed=schedule.seed, solution_samples=0)
    for n in range(start + 1, depth + 1):
        tower = _add_level(n, schedule, tower)
        R, cert = choose_R(n, tower, schedule)
        if n - 1 in certificates:
            link_by_frames(certificates[n - 1], cert)
        schedule.R.append(R)
        d, sigma = choose_delta(n, tower, schedule, delta_samples)
        schedule.delta.append(d)
        margins = dict(cert.margins)
        margins["sigma"] = sigma
        schedule.margins.append(margins)
        certificates[n] = cert
        if on_level is not None:
            on_level(n, schedule, tower, cert)
    if tower is None:
        tower = RationalTower.replay(schedule, depth)
    return BuildResult(schedule, tower, certificates)


def _add_level(n, schedule, tower):
    """a_n, eps_n and the poles of r_n, with phase-nudge retries."""
    for attempt in range(MAX_RETRIES + 1):
        R_prev = schedule.R[n - 1]
        schedule.a.append(choose_a(n, R_prev, schedule.seed, attempt))
        schedule.eps.append(0.0)
        schedule.eps[n] = choose_epsilon(n, schedule)
        schedule.attempts.append(attempt)
        try:
            if n == 1:
                return RationalTower.start(schedule)
            mark = tower.checkpoint()
            try:
                tower.extend_poles(n)
            except Exception:
                tower.rollback(mark)
                raise
            return tower
        except (GenericityFailure, PoleCollision, MultiplePoleSuspected) as exc:
            reason = str(exc)
            del schedule.a[n:], schedule.eps[n:], schedule.attempts[n:]
    raise ConstructionFailure(n, f"no generic a_{n} after {MAX_RETRIES} retries: {reason}")
