import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantorembed import regions
from cantorembed.regions import (HORIZONTAL, VERTICAL, Bidisc, certify_level, expected_counts,
                                 gamma_coords, membership, pair_of_pants_report)
from cantorembed.sphere import mp_distance
from cantorembed.tower import INF, fibonacci

FIB = fibonacci(12)


def test_bidisc_and_coordinates(sched8):
    B = Bidisc(3, sched8.R[3])
    assert B.radius == sched8.R[3]
    assert B.contains(0, 0) and not B.contains(INF, 0)
    vals = ["r0", "r1", "r2", "r3"]
    assert gamma_coords(3, vals) == ("r2", "r3")
    assert gamma_coords(2, vals) == ("r2", "r1")
    assert gamma_coords(0, vals) == ("r0", 0)


def test_membership_examples(tower8, sched8):
    for n in range(1, 9):
        assert membership(INF, n, tower8, sched8.R[n]) == "delta"
        for p in tower8.level(n):
            assert membership(p.z, n, tower8, sched8.R[n]) == "delta"
    # gamma_1(0) = (0, -eps_1/a_1), both coordinates inside D_1
    assert sched8.eps[1] / abs(sched8.a[1]) < sched8.R[1]
    assert membership(0, 1, tower8, sched8.R[1]) == "K"


@given(st.integers(1, 30))
def test_expected_split_sums_to_b_n(n):
    k = fibonacci(n + 1)
    v, h = expected_counts(n)
    assert v + h == k[n + 1]
    assert (v, h) == ((k[n - 1], k[n]) if n % 2 == 0 else (k[n], k[n - 1]))


def test_first_two_levels(decomps8, tower8):
    d1 = decomps8[1]
    assert len(d1.components) == 2 and d1.counts() == (1, 1)
    by = {c.pole.index: c for c in d1.components}
    a1 = tower8.level(1)[0]
    inf = tower8.level(0)[0]
    assert by[a1.index].orientation == VERTICAL
    assert by[inf.index].orientation == HORIZONTAL
    d2 = decomps8[2]
    assert len(d2.components) == 3 and d2.counts() == (1, 2)


@pytest.mark.parametrize("n", range(1, 9))
def test_census_and_diameters(decomps8, n):
    dec = decomps8[n]
    assert dec.failures == []
    assert len(dec.components) == FIB[n + 1]
    assert dec.counts() == expected_counts(n)
    bound = 1 / FIB[n + 1] ** n
    for c in dec.components:
        assert c.diam_lo <= c.diam_hi < bound
        assert dec.cell_tol == pytest.approx(bound / 64)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_diameter_lower_end_matches_exact_distances(decomps8, n):
    """diam_lo against mp pairwise distances of the hull pixel centres."""
    for c in decomps8[n].components[:6]:
        ctx = c.frame.h.context
        hull = regions._hull_points(regions._pixel_centers(c.mask))
        pts = [c.frame.point(p.real, p.imag) for p in hull]
        exact = max(mp_distance(ctx, p, q) for p in pts for q in pts)
        assert abs(exact - c.diam_lo) <= 1e-6 * exact


@pytest.mark.parametrize("n", range(1, 9))
def test_each_component_holds_one_preimage_point(decomps8, tower8, n):
    pts = tower8.preimage_points(n)
    for c in decomps8[n].components:
        inside = [p for p in pts if regions._frame_contains(c.frame, p.z)]
        assert [p.index for p in inside] == [c.pole.index]
    assert regions.frames_disjoint(decomps8[n].components)


@pytest.mark.parametrize("n", range(1, 8))
def test_pair_of_pants(decomps8, tower8, n):
    rep = pair_of_pants_report(tower8, decomps8[n], decomps8[n + 1])
    assert rep.problems == []
    v, h = expected_counts(n)
    assert len(rep.splits) == FIB[n]
    assert len(rep.shrinks) == (v if n % 2 == 0 else h)
    assert len(rep.splits) * 2 + len(rep.shrinks) == FIB[n + 2]
    # every child has exactly one parent
    assert all(c.parent_id is not None for c in decomps8[n + 1].components)
    split_orientation = HORIZONTAL if n % 2 == 0 else VERTICAL
    for pid in rep.splits:
        assert decomps8[n].components[pid].orientation == split_orientation


def test_level_two_splitting(decomps8, tower8):
    rep = pair_of_pants_report(tower8, decomps8[2], decomps8[3])
    horizontals = [c.id for c in decomps8[2].components if c.orientation == HORIZONTAL]
    assert sorted(rep.splits) == sorted(horizontals) and len(horizontals) == 2
    assert len(decomps8[3].components) == 5


def test_too_small_radius_is_rejected(tower8, sched8):
    cert = certify_level(tower8, 3, abs(sched8.a[3]) * 0.5)
    assert not cert.ok


def test_certificates_record_margins(built8):
    for n, cert in built8.certificates.items():
        assert cert.ok
        m = cert.margins
        assert m["frame_over_rho"] >= regions.MIN_BOX_OVER_RHO
        assert m["diameter_over_bound"] < 1
        assert m["ring_max_over_R"] < 1
        assert m["A_in_C_min_over_R"] < 1


def test_k_grows_into_interior_of_next_level(decomps8, tower8):
    """K_n inside the interior of K_{n+1}, via the parent assignment checks."""
    for n in range(1, 8):
        child = decomps8[n + 1]
        for c in child.components:
            c.parent_id = None
        problems = regions.assign_parents(tower8, decomps8[n], child)
        assert problems == []
        assert all(c.parent_id is not None for c in child.components)


def test_quadtree_budget_too_small_is_reported(built8, tower8):
    with pytest.raises(ValueError):
        regions.decompose(4, tower8, built8.certificates[4], min_depth=1, depth_budget=2)
    dec = regions.decompose(4, tower8, built8.certificates[4], min_depth=3, depth_budget=3)
    assert any("resolution-insufficient" in f for f in dec.failures)
    assert all(c.depth <= 3 for c in dec.components)
