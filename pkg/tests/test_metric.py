"""Geodesics, intrinsic distances, comparison angles."""
import math

import numpy as np
import pytest

from cat0_pursuit import (
    CoincidentPoints,
    bundled_domain,
    chi,
    geodesic,
    intrinsic_diameter,
    intrinsic_distance,
    separation_and_direction,
)
from cat0_pursuit.metric import SeparationEvaluator, certify_taut


@pytest.fixture(scope="module")
def lshape():
    return bundled_domain("lshape")


def test_straight_geodesic_in_square():
    dom = bundled_domain("unit_square")
    g = geodesic(dom, (0.1, 0.1), (0.9, 0.7), mode="sharp")
    assert g.waypoints.shape == (2, 2)
    assert g.length == pytest.approx(math.hypot(0.8, 0.6))


def test_lshape_corner_geodesic(lshape):
    # spec'd example pair: bends at the reflex corner, length sqrt(2)
    g = geodesic(lshape, (1.5, 0.5), (0.5, 1.5), mode="sharp")
    assert g.length == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert any(np.allclose(w, (1.0, 1.0)) for w in g.waypoints)


def test_rounded_geodesic_cuts_the_fillet(lshape):
    a, b = (1.9, 0.9), (0.9, 1.9)
    sharp = intrinsic_distance(lshape, a, b, "sharp")
    rounded = intrinsic_distance(lshape, a, b, "rounded")
    g = geodesic(lshape, a, b, mode="rounded")
    assert rounded < sharp  # the reflex sliver shortens the wrap
    assert len(g.arc_annotations) == 1
    assert g.length == pytest.approx(rounded)


def test_rounded_vs_arc_length_formula(lshape):
    # wrap length = two tangents plus r * sweep, recomputed from the parts
    g = geodesic(lshape, (1.9, 0.9), (0.9, 1.9), mode="rounded")
    arc = g.arc_annotations[0]
    total = abs(arc.sweep) * arc.radius
    W = g.waypoints
    t_in, _ = _tangent_points(arc, W[0])
    t_out, _ = _tangent_points(arc, W[2])
    total += np.hypot(*(t_in - W[0])) + np.hypot(*(t_out - W[2]))
    assert g.length == pytest.approx(total, rel=1e-9)


def _tangent_points(arc, p):
    c = arc.center
    d = np.hypot(*(p - c))
    tl = math.sqrt(max(d * d - arc.radius * arc.radius, 0.0))
    return p + tl * _unit(c - p), tl


def _unit(v):
    return v / np.hypot(*v)


def test_degenerate_same_point(lshape):
    assert intrinsic_distance(lshape, (0.5, 0.5), (0.5, 0.5), "sharp") == 0.0


def test_distance_symmetry_and_triangle(lshape):
    rng = np.random.default_rng(5)
    pts = []
    while len(pts) < 3:
        p = rng.uniform(0, 2, size=2)
        if p[0] <= 0.95 or p[1] <= 0.95:
            pts.append(p)
    a, b, c = pts
    for mode in ("sharp", "rounded"):
        dab = intrinsic_distance(lshape, a, b, mode)
        dba = intrinsic_distance(lshape, b, a, mode)
        assert dab == pytest.approx(dba, rel=1e-12)
        dac = intrinsic_distance(lshape, a, c, mode)
        dcb = intrinsic_distance(lshape, c, b, mode)
        assert dab <= dac + dcb + 1e-12


def test_point_at_endpoints_and_speed(lshape):
    g = geodesic(lshape, (1.5, 0.5), (0.5, 1.5), mode="rounded")
    assert np.allclose(g.point_at(0.0), (1.5, 0.5))
    assert np.allclose(g.point_at(g.length), (0.5, 1.5))
    # unit speed: chord over parameter gap approaches 1
    ss = np.linspace(0, g.length, 200)
    P = np.array([g.point_at(s) for s in ss])
    seg = np.hypot(*np.diff(P, axis=0).T)
    assert np.all(seg <= np.diff(ss) + 1e-12)


def test_graze_near_corner_is_straight(lshape):
    # endpoints almost collinear with the reflex corner: noise in the turn
    # sign must not route the path the long way round the fillet disc
    y = np.array([0.0, 2.0])
    x_base = np.array([1.00217897, 0.99782103])
    u = (y - x_base) / np.hypot(*(y - x_base))
    for s in [0.0, 1e-3, 2e-3, 3e-3, 5e-3, 8e-3]:
        x = x_base + s * u
        d = intrinsic_distance(lshape, x, y, "rounded")
        assert d == pytest.approx(float(np.hypot(*(y - x))), abs=1e-9)


def test_intrinsic_diameter_lshape(lshape):
    # realized by the far corner pair, wrapping the reflex vertex
    assert intrinsic_diameter(lshape, mode="sharp") == pytest.approx(2 * math.sqrt(2), rel=1e-9)


def test_separation_and_direction(lshape):
    d, u = separation_and_direction(lshape, np.array([1.5, 0.5]), np.array([0.5, 1.5]), "sharp")
    assert d == pytest.approx(math.sqrt(2))
    # first leg aims at the corner
    assert np.allclose(u, _unit(np.array([1.0, 1.0]) - np.array([1.5, 0.5])))


def test_chi_points_along_the_geodesic(lshape):
    # free pair: chi is the unit chord
    a, b = np.array([0.2, 0.2]), np.array([0.8, 0.6])
    assert np.allclose(chi(lshape, a, b, mode="sharp"), _unit(b - a))
    # wrapped pair: chi aims at the corner, not the chord
    a, b = np.array([1.5, 0.5]), np.array([0.5, 1.5])
    assert np.allclose(chi(lshape, a, b, mode="sharp"), _unit(np.array([1.0, 1.0]) - a))


def test_chi_rejects_coincident():
    dom = bundled_domain("unit_square")
    with pytest.raises(CoincidentPoints):
        chi(dom, (0.5, 0.5), (0.5, 0.5), mode="sharp")


def test_separation_evaluator_matches_scalar(lshape):
    rng = np.random.default_rng(17)
    P, Q = [], []
    while len(P) < 12:
        p = rng.uniform(0, 2, size=2)
        q = rng.uniform(0, 2, size=2)
        if (p[0] <= 0.95 or p[1] <= 0.95) and (q[0] <= 0.95 or q[1] <= 0.95):
            P.append(p)
            Q.append(q)
    P, Q = np.array(P), np.array(Q)
    for mode in ("sharp", "rounded"):
        ev = SeparationEvaluator(lshape, mode)
        batch = ev.distances(P, Q)
        for k in range(P.shape[0]):
            assert batch[k] == pytest.approx(
                intrinsic_distance(lshape, P[k], Q[k], mode), rel=1e-9
            )


def test_certify_taut_accepts_geodesics(lshape):
    g = geodesic(lshape, (1.8, 0.3), (0.2, 1.9), mode="rounded")
    assert certify_taut(lshape, g)


def test_geodesic_json_shape(lshape):
    g = geodesic(lshape, (1.9, 0.9), (0.9, 1.9), mode="rounded")
    d = g.to_json_dict()
    assert set(d) == {"waypoints", "length", "arcs"}
    assert d["length"] == pytest.approx(g.length)
    assert len(d["arcs"]) == 1
    assert {"center", "radius", "start_angle", "sweep", "vertex_index"} <= set(d["arcs"][0])
