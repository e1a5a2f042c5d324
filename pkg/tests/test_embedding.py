import numpy as np
import pytest

from cantorembed import embedding as emb
from cantorembed.regions import membership
from cantorembed.sphere import random_sphere_points
from cantorembed.tower import INF


def test_gamma_one_closed_form(tower8, sched8):
    for z in (0.3 + 0.2j, -4 + 1j, 100j):
        p = emb.gamma(1, z, tower8)
        x, y = (complex(c) for c in p.value)
        assert x == pytest.approx(z)
        assert y == pytest.approx(sched8.eps[1] / (z - sched8.a[1]), rel=1e-14)


def test_gamma_at_preimage_points(tower8):
    assert emb.gamma(4, INF, tower8).is_infinity
    for n in range(1, 9):
        for p in tower8.preimage_points(n):
            if p.z is not INF:
                assert emb.gamma(n, p.z, tower8).is_infinity


@pytest.mark.parametrize("n", range(1, 9))
def test_shear_composition_matches_rational_form(tower8, sched8, n):
    rng = np.random.default_rng([n, 1])
    zs = random_sphere_points(rng, 100)
    x, y = emb.gamma_float(tower8, zs, n)
    for z, a, b in zip(zs, x, y):
        sx, sy = emb.gamma_by_shears(n, z, sched8)
        scale = 1 + abs(a) + abs(b)
        assert abs(sx - a) + abs(sy - b) < 1e-9 * scale


def test_K_samples_are_in_K(tower8, sched8):
    rng = np.random.default_rng(2)
    for n in (1, 3, 6):
        pts = emb.sample_K(tower8, sched8, n, 200, rng)
        assert len(pts) == 200
        for z in pts[:25]:
            assert membership(complex(z), n, tower8, sched8.R[n]) == "K"
        x, y = emb.gamma_float(tower8, pts, n)
        assert np.all(np.isfinite(x)) and np.all(np.isfinite(y))


def test_cauchy_bounds(tower8, sched8):
    res = emb.cauchy_check(tower8, sched8, samples=2000)
    assert res.ok
    for k in range(1, 8):
        rows = [r for r in res.rows if r[0] == k]
        assert sum(r[2] for r in rows) < sched8.delta[k]
        for r0, r1 in zip(rows, rows[1:]):
            assert r1[2] <= 0.6 * r0[2]
        for _, n, worst, bound, _ in rows:
            assert bound == sched8.delta[k] * 2.0 ** -(n + 1 + k)
            assert worst < bound


def test_empty_K0_is_vacuous(tower8, sched8):
    res = emb.cauchy_check(tower8, sched8, k_range=[0], samples=10)
    assert res.ok and res.rows == [(0, None, 0.0, float("inf"), True)]


def test_properness(tower8, sched8):
    res = emb.properness_check(tower8, sched8)
    assert res.ok
    margins = [r[2] for r in res.rows]
    assert all(m > 0 for m in margins)
    assert margins == sorted(margins)
    assert res.rows[0][0] == 3 and sched8.R[0] == 0.0


@pytest.mark.parametrize("n", range(1, 9))
def test_injectivity(tower8, sched8, n):
    res = emb.injectivity_check(tower8, sched8, n)
    assert res.ok
    _, gap, deriv = res.rows[0]
    assert gap > 0 and deriv > emb.DERIV_FLOOR


def test_first_level_injectivity_margin_bounded_by_projection(tower8, sched8):
    rng = np.random.default_rng([0, 1, 13])
    pts = random_sphere_points(rng, 400)
    res = emb.injectivity_check(tower8, sched8, 1)
    diffs = np.abs(pts[:, None] - pts[None, :])[np.triu_indices(400, 1)]
    assert res.rows[0][1] >= diffs.min() * (1 - 1e-12)


@pytest.mark.parametrize("n", [1, 4, 8])
def test_A_in_C_and_mid(tower8, sched8, n):
    assert emb.a_in_c_check(tower8, sched8, n, samples=10_000).ok
    assert emb.mid_check(tower8, sched8, n).ok


def test_preimage_chain(tower8):
    res = emb.preimage_chain_check(tower8)
    assert res.ok and len(res.rows) == 7


@pytest.mark.parametrize("n", [2, 4, 6])
def test_truncated_limit_stays_within_delta(tower8, sched8, n):
    """|gamma_8 - gamma_n| < delta_n on K_n, so the limit inherits injectivity."""
    rng = np.random.default_rng([n, 5])
    pts = emb.sample_K(tower8, sched8, n, 500, rng)
    x8, y8 = emb.gamma_float(tower8, pts, 8)
    xn, yn = emb.gamma_float(tower8, pts, n)
    gap = np.sqrt(np.abs(x8 - xn) ** 2 + np.abs(y8 - yn) ** 2)
    assert gap.max() < sched8.delta[n]
