import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantorembed import schedule as sch
from cantorembed.embedding import injectivity_margin
from cantorembed.regions import LevelCertificate
from cantorembed.schedule import (ConstructionFailure, ParameterSchedule, ShearMap, build,
                                  choose_a, choose_epsilon, default_seed, epsilon_bound)
from cantorembed.sphere import chordal_matrix
from cantorembed.tower import GenericityFailure, RationalTower


def independent_eps_bound(n, a, R, delta):
    """min_j delta_j 2^-(j+n) (|a_n| - R_j - 1/2), R_0 read as 0."""
    terms = []
    for j in range(n):
        Rj = 0.0 if j == 0 else R[j]
        terms.append(delta[j] / 2 ** (j + n) * (abs(a[n]) - Rj - 0.5))
    return min(terms)


def test_first_epsilon():
    s = ParameterSchedule(seed=1, a=[None, 1.0], eps=[None])
    # sup over |x| <= 1/2 of eps/|x - 1| is 2 eps, which must stay below delta_0 / 2
    limit = (0.25 / 2) / 2
    assert limit == 1 / 16
    eps = choose_epsilon(1, s)
    assert eps == 1 / 32 and eps < limit


def test_second_epsilon_factor_with_a2_twice_R1():
    R1 = 40.0
    s = ParameterSchedule(seed=1, a=[None, 1.0, 2 * R1], eps=[None, 1 / 32],
                          R=[0.0, R1], delta=[0.25, 0.1])
    factor_j1 = 0.1 * 2.0**-3 * (2 * R1 - R1 - 0.5)
    factor_j0 = 0.25 * 2.0**-2 * (2 * R1 - 0.5)
    assert epsilon_bound(2, s.a, s.R, s.delta) == pytest.approx(min(factor_j0, factor_j1))


@given(st.integers(1, 6), st.floats(1.0, 1e12), st.integers(0, 2**32 - 1))
def test_epsilon_bound_matches_closed_form(n, growth, seed):
    rng = np.random.default_rng(seed)
    R = [0.0]
    a = [None]
    for k in range(1, n + 1):
        mod = math.sqrt(2) * R[-1] + 1
        a.append(mod * cmath.exp(2j * math.pi * rng.random()))
        R.append(abs(a[-1]) * (2 + growth * rng.random()))
    delta = [0.25 / 2**k for k in range(n + 1)]
    assert epsilon_bound(n, a, R, delta) == pytest.approx(independent_eps_bound(n, a, R, delta), rel=1e-12)


@given(st.integers(2, 40), st.floats(0, 1e300), st.integers(0, 10**6), st.integers(0, 20))
def test_choose_a_modulus(n, R_prev, seed, attempt):
    a = choose_a(n, R_prev, seed, attempt)
    assert abs(a) > math.sqrt(2) * R_prev + 0.5
    assert abs(a) > R_prev
    assert a == choose_a(n, R_prev, seed, attempt)
    base = choose_a(n, R_prev, seed, 0)
    assert abs(abs(a) - abs(base)) <= 1e-12 * abs(base)


def test_built_schedule_invariants(sched8):
    assert sched8.violations() == []
    assert sched8.delta[0] == 0.25
    for n in range(1, 9):
        assert sched8.R[n - 1] < abs(sched8.a[n]) < sched8.R[n]
        m = math.log2(sched8.R[n] / abs(sched8.a[n]))
        assert m >= 1 and abs(m - round(m)) < 1e-9
        assert sched8.delta[n] < sched8.delta[n - 1]
        if n >= 2:
            assert sched8.eps[n] < sched8.eps[n - 1]
            assert abs(sched8.a[n]) > math.sqrt(2) * sched8.R[n - 1] + 0.5
        assert sched8.eps[n] == pytest.approx(
            min(0.5 * independent_eps_bound(n, sched8.a, sched8.R, sched8.delta),
                sched8.eps[n - 1] / 2 if n >= 2 else math.inf), rel=1e-12)


def test_violations_are_reported(sched8):
    broken = sched8.truncated(4)
    broken.eps[3] = broken.eps[2] * 2
    assert any("eps_3" in v for v in broken.violations())


def test_shear_parity():
    odd = ShearMap("odd", 5 + 0j, 0.1)
    even = ShearMap("even", 5 + 0j, 0.1)
    assert odd(1, 2)[0] == 1 and odd(1, 2)[1] == 2 + 0.1 / (1 - 5)
    assert even(1, 2)[1] == 2 and even(1, 2)[0] == 1 + 0.1 / (2 - 5)


def test_shear_estimate_on_smaller_bidiscs(sched8):
    """Sampled sup of |f_n - id| over B_j(1/2) against delta_j 2^-(j+n)."""
    t = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
    for n in range(1, 9):
        f = ShearMap.of_level(n, sched8)
        for j in range(n):
            radius = (sched8.R[j] if j else 0.0) + 0.5
            sampled = np.max(np.abs(f.g(radius * np.exp(1j * t))))
            closed = f.sup_displacement(radius)
            assert sampled <= closed * (1 + 1e-12)
            assert closed < sched8.delta[j] * 2.0 ** -(j + n)


def test_composed_shears_stay_close_to_identity(sched8):
    """|f_n o ... o f_j - id| < 1/2 on boundary samples of B_{j-1}."""
    rng = np.random.default_rng(5)
    for j in range(1, 9):
        R = sched8.R[j - 1]
        m = 10_000
        t1, t2 = rng.uniform(0, 2 * np.pi, (2, m))
        rad = R * np.sqrt(rng.uniform(0, 1, m))
        half = m // 2
        x = np.concatenate([R * np.exp(1j * t1[:half]), rad[half:] * np.exp(1j * t1[half:])])
        y = np.concatenate([rad[:half] * np.exp(1j * t2[:half]), R * np.exp(1j * t2[half:])])
        for n in range(j, 9):
            dx = np.zeros(m, complex)
            dy = np.zeros(m, complex)
            for k in range(j, n + 1):
                f = ShearMap.of_level(k, sched8)
                if k % 2:
                    dy = dy + f.g(x + dx)
                else:
                    dx = dx + f.g(y + dy)
            assert np.max(np.hypot(np.abs(dx), np.abs(dy))) < 0.5


def test_first_injectivity_margin_dominated_by_coordinate_projection(tower8):
    rng = np.random.default_rng(3)
    pts = rng.normal(size=200) + 1j * rng.normal(size=200)
    sigma = injectivity_margin(tower8, 1, pts, rng, 200)
    ch = chordal_matrix(pts)
    ang = 2 * np.arcsin(np.minimum(ch / 2, 1))
    iu = np.triu_indices(len(pts), 1)
    projection = np.abs(pts[:, None] - pts[None, :])[iu] / ang[iu]
    # first coordinate is the identity: |gamma_1(z) - gamma_1(w)| >= |z - w|
    assert sigma >= min(projection.min(), 0.5) * (1 - 1e-12)
    assert sigma > 0


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("CANTOR_SEED", "123")
    assert default_seed() == 123
    monkeypatch.delenv("CANTOR_SEED")
    assert default_seed() == 7


def test_same_seed_same_schedule():
    a = build(4, 11).schedule
    b = build(4, 11).schedule
    assert a == b
    assert build(4, 12).schedule.a[2] != a.a[2]


def test_genericity_retry_nudges_phase_only(monkeypatch):
    original = RationalTower.extend_poles
    calls = {"n": 0}

    def flaky(self, to_level):
        if to_level == 3 and calls["n"] == 0:
            calls["n"] += 1
            raise GenericityFailure(3, 0, "forced")
        return original(self, to_level)

    monkeypatch.setattr(RationalTower, "extend_poles", flaky)
    s = build(3, 7).schedule
    clean = choose_a(3, s.R[2], 7, 0)
    assert s.attempts[3] == 1
    assert s.a[3] != clean
    assert abs(abs(s.a[3]) - abs(clean)) <= 1e-12 * abs(clean)
    assert s.violations() == []


def test_retry_exhaustion_is_a_construction_failure(monkeypatch):
    def broken(self, to_level):
        raise GenericityFailure(to_level, 0, "forced")

    monkeypatch.setattr(RationalTower, "extend_poles", broken)
    with pytest.raises(ConstructionFailure) as info:
        build(2, 7)
    assert info.value.level == 2


def test_ladder_exhaustion(monkeypatch):
    monkeypatch.setattr(sch, "certify_level",
                        lambda tower, n, R, **kw: LevelCertificate(n, R, [], ["forced"]))
    with pytest.raises(ConstructionFailure) as info:
        build(2, 7)
    assert info.value.level == 1 and "ladder" in info.value.reason
