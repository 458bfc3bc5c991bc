import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ngma import (InvalidSpec, RegionSpec, bc_noma_boundary, bc_oma_boundary,
                  mac_noma_boundary, mac_oma_boundary)
from ngma.regions import (bc_oma_points, bc_region_slack, mac_corners,
                          mac_oma_tangent_share, mac_region_slack,
                          mac_sum_face_gap, pareto_front)

FIG = RegionSpec(10.0, 1.0, 1.0, 1001)
snrs = st.floats(0.05, 200.0, allow_nan=False)


def _has_point(points, target, tol):
    return np.min(np.max(np.abs(points - np.asarray(target)), axis=1)) <= tol


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        RegionSpec(0, 1)
    with pytest.raises(InvalidSpec):
        RegionSpec(1, 1, power_budget=-1)
    with pytest.raises(InvalidSpec):
        RegionSpec(1, 1, grid_points=1)


def test_from_db():
    s = RegionSpec.from_db(10, 0)
    assert s.snr_1 == pytest.approx(10.0) and s.snr_2 == pytest.approx(1.0)


# -- broadcast -----------------------------------------------------------------

def test_bc_noma_reference_points():
    pts = bc_noma_boundary(FIG).points
    assert _has_point(pts, (math.log2(11), 0.0), 1e-12)
    assert _has_point(pts, (0.0, 1.0), 1e-12)
    assert _has_point(pts, (math.log2(6), math.log2(4 / 3)), 1e-12)


def test_bc_noma_swaps_when_user_two_is_stronger():
    a = bc_noma_boundary(RegionSpec(10.0, 1.0, grid_points=51)).points
    b = bc_noma_boundary(RegionSpec(1.0, 10.0, grid_points=51)).points
    np.testing.assert_allclose(np.sort(a[:, ::-1], axis=0), np.sort(b, axis=0), atol=1e-12)


def test_bc_oma_direct_evaluation():
    # tau = 0.5, p1 = p2 = 0.5: 0.5*log2(1 + 0.5*10/0.5), 0.5*log2(1 + 0.5*1/0.5)
    pts = bc_oma_points(RegionSpec(10.0, 1.0, grid_points=3))
    assert _has_point(pts, (0.5 * math.log2(11), 0.5), 1e-12)


def test_bc_oma_corner_coincidence():
    oma = bc_oma_boundary(FIG).points
    noma = bc_noma_boundary(FIG).points
    for corner in ((math.log2(11), 0.0), (0.0, 1.0)):
        assert _has_point(oma, corner, 1e-9)
        assert _has_point(noma, corner, 1e-9)


def test_bc_oma_inside_noma_grid():
    spec = RegionSpec(10.0, 1.0, grid_points=301)
    assert bc_region_slack(spec, bc_oma_points(spec)).min() >= -1e-9


def test_bc_oma_fixed_power_inside_reallocated():
    spec = RegionSpec(10.0, 1.0, grid_points=101)
    fixed = bc_oma_points(spec, power_reallocation=False)
    assert bc_region_slack(spec, fixed).min() >= -1e-9
    realloc = bc_oma_points(spec)
    assert np.all(fixed <= realloc + 1e-12)


def test_bc_boundary_concave():
    pts = bc_noma_boundary(RegionSpec(10.0, 1.0, grid_points=101)).points
    mids = 0.5 * (pts[:, None, :] + pts[None, :, :]).reshape(-1, 2)
    assert bc_region_slack(FIG, mids).min() >= -1e-9


def test_pareto_front_simple():
    pts = [[0, 2], [1, 1], [0.5, 0.5], [2, 0], [1, 0.9]]
    np.testing.assert_array_equal(pareto_front(pts), [[0, 2], [1, 1], [2, 0]])


@settings(max_examples=40, deadline=None)
@given(snrs, snrs, st.floats(0.1, 10.0))
def test_bc_boundary_monotone_and_nonnegative(s1, s2, p):
    spec = RegionSpec(s1, s2, p, grid_points=201)
    for b in (bc_noma_boundary(spec), bc_oma_boundary(spec)):
        assert np.all(b.points >= 0)
        assert np.all(np.diff(b.r1) >= -1e-12)
        assert np.all(np.diff(b.r2) <= 1e-12)


@settings(max_examples=40, deadline=None)
@given(snrs, snrs)
def test_bc_oma_contained_property(s1, s2):
    spec = RegionSpec(s1, s2, 1.0, grid_points=41)
    assert bc_region_slack(spec, bc_oma_points(spec)).min() >= -1e-9


# -- multiple access -----------------------------------------------------------

def test_mac_corners():
    a, b = mac_corners(FIG)
    assert a == pytest.approx((math.log2(6), 1.0), abs=1e-12)
    assert b == pytest.approx((math.log2(11), math.log2(12 / 11)), abs=1e-12)
    assert sum(a) == pytest.approx(math.log2(12), abs=1e-12)
    assert sum(b) == pytest.approx(math.log2(12), abs=1e-12)


def test_mac_pentagon_faces():
    pts = mac_noma_boundary(FIG).points
    assert mac_region_slack(FIG, pts).min() >= -1e-12
    assert pts[0] == pytest.approx((0.0, 1.0))
    assert pts[-1] == pytest.approx((math.log2(11), 0.0))
    segment = pts[1:-1]
    np.testing.assert_allclose(mac_sum_face_gap(FIG, segment), 0.0, atol=1e-12)


def test_mac_oma_tangent_point():
    share = mac_oma_tangent_share(FIG)
    assert share == pytest.approx(10 / 11)
    r1 = share * math.log2(1 + 10 / share)
    r2 = (1 - share) * math.log2(1 + 1 / (1 - share))
    assert r1 + r2 == pytest.approx(math.log2(12), abs=1e-9)
    pts = mac_oma_boundary(FIG).points
    assert _has_point(pts, (r1, r2), 1e-12)


def test_mac_oma_touches_sum_face_once():
    pts = mac_oma_boundary(FIG).points
    gap = mac_sum_face_gap(FIG, pts)
    touching = np.flatnonzero(gap <= 1e-9)
    assert touching.size >= 1
    assert np.all(np.diff(touching) == 1)
    assert np.all(mac_region_slack(FIG, pts) >= -1e-12)
    others = np.delete(gap, touching)
    assert np.all(others > 0)


def test_mac_oma_single_user_corners():
    pts = mac_oma_boundary(FIG).points
    assert _has_point(pts, (math.log2(11), 0.0), 1e-12)
    assert _has_point(pts, (0.0, 1.0), 1e-12)


def test_mac_oma_fixed_power_strictly_inside():
    pts = mac_oma_boundary(FIG, power_reallocation=False).points
    inner = pts[1:-1]
    assert np.all(mac_sum_face_gap(FIG, inner) > 1e-6)


@settings(max_examples=40, deadline=None)
@given(snrs, snrs, st.floats(0.1, 10.0))
def test_mac_oma_inside_pentagon_property(s1, s2, p):
    spec = RegionSpec(s1, s2, p, grid_points=201)
    pts = mac_oma_boundary(spec).points
    assert mac_region_slack(spec, pts).min() >= -1e-9
    gap = mac_sum_face_gap(spec, pts)
    assert gap.min() == pytest.approx(0.0, abs=1e-9)
