import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorembed.oracle import (ORACLE_MAX_DEPTH, OracleOverflow, PolyOracle, aberth, degree,
                                horner, match_roots, oracle_agreement, oracle_expand)
from cantorembed.schedule import ParameterSchedule
from cantorembed.tower import INF

FIB = [1, 1, 2, 3, 5, 8, 13, 21, 34]


def test_level_one_and_two_closed_forms(oracle8, sched8):
    ctx = oracle8.ctx
    a1, a2 = ctx.mpc(sched8.a[1]), ctx.mpc(sched8.a[2])
    e1, e2 = ctx.mpf(sched8.eps[1]), ctx.mpf(sched8.eps[2])
    lv1 = oracle8.levels[1]
    assert lv1.p == [e1] and lv1.q == [-a1, 1]
    lv2 = oracle8.levels[2]
    # q_2 = eps_1 - a_2 (z - a_1); p_2 = z q_2 + eps_2 (z - a_1)
    assert degree(lv2.q) == 1
    for z in (ctx.mpc(0.3, 0.1), ctx.mpc(-2, 5)):
        q2 = e1 - a2 * (z - a1)
        assert abs(horner(lv2.q, z) - q2) < 1e-30 * (1 + abs(q2))
        p2 = z * q2 + e2 * (z - a1)
        assert abs(horner(lv2.p, z) - p2) < 1e-30 * (1 + abs(p2))
    roots = oracle8.poles(2)
    assert INF in roots
    finite = [r for r in roots if r is not INF]
    assert len(finite) == 1 and abs(finite[0] - (a1 + e1 / a2)) < 1e-40


def test_denominator_degrees_follow_fibonacci(oracle8):
    assert [oracle8.levels[n].pole_count for n in range(9)] == FIB
    assert degree(oracle8.levels[5].q) + oracle8.levels[5].order_at_infinity == 8


@pytest.mark.parametrize("n", range(1, 9))
def test_agreement_with_tracked_tower(tower8, oracle8, n):
    gap, match = oracle_agreement(tower8, oracle8, n, points=200)
    assert gap < 1e-9
    assert match < 1e-8


def test_depth_cap_and_overflow(sched8):
    with pytest.raises(ValueError):
        PolyOracle(sched8, ORACLE_MAX_DEPTH + 1)
    huge = ParameterSchedule(seed=0, a=[None, 1, 1e200, 1e200, 1e200],
                             eps=[None, 0.5, 0.25, 0.125, 0.0625], R=[0, 1, 2, 3, 4])
    with pytest.raises(OracleOverflow):
        PolyOracle(huge, 4)


def test_oracle_expand_uses_extra_precision(tower8):
    orc = oracle_expand(tower8, 3)
    assert orc.depth == 3 and orc.ctx.dps >= tower8.dps[3] + 40


roots_strategy = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    min_size=1, max_size=7)


@settings(max_examples=40)
@given(roots_strategy)
def test_aberth_recovers_known_roots(roots):
    ctx = mpmath.MPContext()
    ctx.dps = 50
    # keep the test about root finding, not about clusters below the tolerance
    for i in range(len(roots)):
        for j in range(i):
            if abs(roots[i] - roots[j]) < 1e-3:
                return
    coeffs = [ctx.mpc(1)]
    for r in roots:
        coeffs = [ctx.mpc(0)] + coeffs  # multiply by z
        for k in range(len(coeffs) - 1):
            coeffs[k] -= ctx.mpc(r) * coeffs[k + 1]
    found = aberth(ctx, coeffs)
    assert match_roots(ctx, [ctx.mpc(r) for r in roots], found) < 1e-20


def test_match_roots_rejects_count_mismatch():
    ctx = mpmath.MPContext()
    with pytest.raises(ValueError):
        match_roots(ctx, [ctx.mpc(1)], [])
