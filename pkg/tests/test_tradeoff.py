import numpy as np
import pytest

from qtradeoff.model import BlochVector
from qtradeoff.povm import WeightSpec
from qtradeoff.tradeoff import (
    MsePoint,
    SupportingPlane,
    boundary_point_from_weights,
    integer_weight_grid,
    integer_weight_triples,
    origin_tangent_points,
    pairwise_residual,
    single_copy_surface_residual,
    surface_scan,
    two_copy_surface_residual,
    weights_from_boundary_point,
)


def test_residual_landmarks():
    assert abs(single_copy_surface_residual(MsePoint(3, 3, 3))) < 1e-12
    assert abs(single_copy_surface_residual(MsePoint(2, 4, 4))) < 1e-12
    assert abs(two_copy_surface_residual(MsePoint(2, 2, 2))) < 1e-12
    assert abs(single_copy_surface_residual(MsePoint(1, 1, 1)) + 2.0) < 1e-12
    assert abs(two_copy_surface_residual(MsePoint(1, 1, 1)) + 0.25) < 1e-12


def test_pairwise_residual():
    # V_i = V_j = 2 saturates the two-axis trade-off
    assert abs(pairwise_residual(MsePoint(2, 2, 100), 0, 1)) < 1e-12
    assert pairwise_residual(MsePoint(1.5, 1.5, 100), "x", "y") < 0
    assert pairwise_residual(MsePoint(3, 3, 100), 0, 1) > 0
    with pytest.raises(ValueError):
        pairwise_residual(MsePoint(2, 2, 2), 0, 3)
    with pytest.raises(ValueError):
        pairwise_residual(MsePoint(2, 2, 2), "x", "w")


def test_boundary_points_sit_on_surfaces():
    rng = np.random.default_rng(1)
    for _ in range(50):
        w = WeightSpec(*rng.uniform(0.05, 1.0, size=3))
        p1 = boundary_point_from_weights(w, copies=1)
        assert abs(single_copy_surface_residual(p1)) < 1e-9
        p2 = boundary_point_from_weights(w, copies=2)
        assert abs(two_copy_surface_residual(p2)) < 1e-9


def test_boundary_weights_round_trip():
    p = boundary_point_from_weights(WeightSpec(4, 1, 1), copies=1)
    assert np.abs(p.array - np.array([2.0, 4.0, 4.0])).max() < 1e-12
    w = weights_from_boundary_point(p)
    ratio = w.array / w.array[1]
    assert np.abs(ratio - np.array([4.0, 1.0, 1.0])).max() < 1e-9

    rng = np.random.default_rng(2)
    for _ in range(20):
        raw = rng.uniform(0.05, 1.0, size=3)
        w0 = WeightSpec(*(raw / raw.sum()))
        p = boundary_point_from_weights(w0, copies=1)
        back = weights_from_boundary_point(p).normalized()
        assert np.abs(back.array - w0.normalized().array).max() < 1e-6


def test_weights_rejected_off_boundary():
    with pytest.raises(ValueError):
        weights_from_boundary_point(MsePoint(1, 1, 1))


def test_origin_tangent_points():
    grid = integer_weight_grid()
    for copies, resid in ((1, single_copy_surface_residual), (2, two_copy_surface_residual)):
        pts = origin_tangent_points(grid, copies)
        assert len(pts) == len(grid)
        for p in pts:
            assert abs(resid(p)) < 1e-9


def test_integer_weight_triples_dedup():
    triples = integer_weight_triples()
    assert len(triples) == 25
    assert triples[0][0] == (1, 1, 1)
    # proportional triples collapse onto their first representative
    us = [u for u, _ in triples]
    assert (2, 2, 2) not in us and (3, 3, 3) not in us
    for u, w in triples:
        sq = np.array(u, dtype=float) ** 2
        assert np.abs(w.array - sq / sq.sum()).max() < 1e-12


def test_surface_scan_origin():
    grid = integer_weight_grid()
    for copies, resid in ((1, single_copy_surface_residual), (2, two_copy_surface_residual)):
        scan = surface_scan((0.0, 0.0, 0.0), copies, grid)
        assert len(scan.planes) == 25
        assert len(scan.vertices) == 36
        assert scan.clipped == 0
        for plane, w in zip(scan.planes, grid):
            tangent = boundary_point_from_weights(w, copies)
            assert abs(plane.evaluate(tangent.array)) < 1e-9
        for v in scan.vertices:
            # feasible for every sampled plane
            for plane in scan.planes:
                assert plane.evaluate(v.array) >= -1e-7
            # but on the forbidden side of the true curved surface
            assert resid(v) < 1e-9


def test_surface_scan_degenerate_weights():
    # crushing two weights pushes the tangent point toward V_x = 1
    p = boundary_point_from_weights(WeightSpec(1.0, 1e-8, 1e-8), copies=1)
    assert p.vx < 1.001
    assert p.vy > 1e3


def test_surface_scan_empty_grid():
    with pytest.raises(ValueError):
        surface_scan((0.0, 0.0, 0.0), 1, ())


def test_surface_scan_interior_point():
    # a small off-origin scan goes through the SDP route
    grid = integer_weight_grid(values=(1, 2))
    scan = surface_scan((0.2, 0.0, 0.0), 1, grid)
    assert len(scan.planes) == len(grid)
    floor = 1.0 - np.array([0.2, 0.0, 0.0]) ** 2
    for v in scan.vertices:
        assert np.all(v.array >= floor - 1e-7)
    doc = scan.to_json_dict()
    assert doc["copies"] == 1
    assert len(doc["planes"]) == len(grid)


def test_mse_point_validation():
    with pytest.raises(ValueError):
        MsePoint(1, 1, 1, normalization="per_measurement")
    with pytest.raises(ValueError):
        MsePoint(0.0, 1, 1)
    with pytest.raises(ValueError):
        MsePoint(1, -2, 1)
    with pytest.raises(ValueError):
        MsePoint(1, np.inf, 1)


def test_supporting_plane_validation():
    with pytest.raises(ValueError):
        SupportingPlane(weights=WeightSpec(1, 1, 1), offset=0.0)
    plane = SupportingPlane(weights=WeightSpec(1, 1, 1), offset=3.0)
    assert abs(plane.evaluate(np.array([1.0, 1.0, 1.0]))) < 1e-12
    assert plane.evaluate(np.array([2.0, 2.0, 2.0])) > 0
