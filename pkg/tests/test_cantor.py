import math
from types import SimpleNamespace

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantorembed.cantor import (CantorApprox, build_approx, cantor_property_report,
                                cover_bound, cover_sum, descendants, dimension_trend)
from cantorembed.tower import INF, fibonacci

FIB = fibonacci(13)


@pytest.fixture(scope="module")
def approxes(decomps8, tower8):
    return {N: build_approx(N, tower8, decomps8) for N in range(1, 9)}


def test_first_level(approxes, tower8, sched8):
    a = approxes[1]
    assert a.ok
    assert len(a.components) == 2
    zs = [w.z for w in a.witnesses]
    assert INF in zs
    assert any(z is not INF and z == sched8.a[1] for z in zs)


@pytest.mark.parametrize("N", range(1, 9))
def test_witnesses(approxes, N):
    a = approxes[N]
    assert a.problems == []
    assert len(a.witnesses) == FIB[N + 1]


def test_third_level_has_five_witnesses(approxes):
    assert len(approxes[3].witnesses) == 5


def test_each_step_adds_k_n_witnesses(approxes):
    for n in range(1, 8):
        old = {w.index for w in approxes[n].witnesses}
        new = {w.index for w in approxes[n + 1].witnesses}
        assert old < new
        assert len(new - old) == FIB[n]


def test_max_diameters_decrease_below_bound(approxes):
    m = approxes[8].max_diameters
    for n in range(1, 9):
        assert m[n] < 1 / FIB[n + 1] ** n
        if n > 1:
            assert m[n] < m[n - 1]


def test_cover_sum_recomputed(approxes):
    for N, a in approxes.items():
        for eps in (1.0, 0.5, 0.25, 0.1):
            direct = math.fsum(float(c.diam_hi) ** eps for c in a.components)
            assert cover_sum(a, eps) == pytest.approx(direct, rel=1e-12)


def test_cover_sum_examples(approxes):
    for N in range(2, 9):
        assert cover_sum(approxes[N], 1.0) < FIB[N + 1] ** (1 - N)
    assert FIB[7] == 21
    assert cover_sum(approxes[6], 0.5) < 21.0**-2
    assert cover_bound(6, 0.5) == pytest.approx(21.0**-2)


@given(st.floats(0.01, 0.99))
def test_power_monotonicity(approxes, eps):
    a = approxes[5]
    assert cover_sum(a, 1.0) < cover_sum(a, eps)


def test_singleton_cover_degenerates():
    ctx = mpmath.mp
    for d in (1e-3, 1e-30, 1e-300):
        comp = SimpleNamespace(diam_hi=ctx.mpf(d))
        approx = CantorApprox(1, [comp], [], [math.nan, d])
        assert cover_sum(approx, 0.5) == pytest.approx(math.sqrt(d))
    with pytest.raises(ValueError):
        cover_sum(approx, 0)


def test_dimension_trend(approxes):
    rows, verdicts = dimension_trend([approxes[N] for N in range(2, 9)])
    assert verdicts[1.0] and verdicts[0.5] and verdicts[0.25]
    for r in rows:
        assert r.cover_sum > 0 and math.isfinite(r.cover_sum)
        assert r.bound_applies == (r.eps * r.N > 1)
    tenth = [r for r in rows if r.eps == 0.1]
    assert len(tenth) == 7 and not any(r.bound_applies for r in tenth)


def test_property_report(approxes, decomps8):
    rep = cantor_property_report(approxes[8], decomps8)
    assert rep.ok, rep.details
    for n in range(1, 6):
        for c in decomps8[n].components:
            assert len(descendants(decomps8, n, c.id, 3)) >= 2


def test_missing_level_is_rejected(tower8, decomps8):
    with pytest.raises(ValueError):
        build_approx(9, tower8, decomps8)
