"""Domain construction, membership, projection, clearance."""
import numpy as np
import pytest

from cat0_pursuit import (
    BUNDLED_DOMAINS,
    DegeneratePolygon,
    PointOutsideDomain,
    PolygonalDomain,
    RoundingTooLarge,
    SelfIntersecting,
    boundary_clearance,
    bundled_domain,
    points_inside,
    project_points,
    project_to_closure,
)
from cat0_pursuit.geometry import contains, segment_in_closure

SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]


def test_construction_normalizes_orientation():
    ccw = PolygonalDomain.from_vertices(SQUARE, rounding_radius=0.25)
    cw = PolygonalDomain.from_vertices(SQUARE[::-1], rounding_radius=0.25)
    assert np.allclose(np.sort(ccw.verts, axis=0), np.sort(cw.verts, axis=0))
    assert ccw.report.orientation_fixed != cw.report.orientation_fixed
    assert ccw.euclidean_diameter == pytest.approx(np.sqrt(2))


def test_degenerate_polygon_rejected():
    with pytest.raises(DegeneratePolygon):
        PolygonalDomain.from_vertices([(0, 0), (1, 0)], rounding_radius=0.1)
    with pytest.raises(DegeneratePolygon):
        PolygonalDomain.from_vertices([(0, 0), (1, 0), (2, 0)], rounding_radius=0.1)


def test_self_intersecting_rejected():
    bow = [(0, 0), (1, 1), (1, 0), (0, 1)]
    with pytest.raises(SelfIntersecting):
        PolygonalDomain.from_vertices(bow, rounding_radius=0.05)


def test_rounding_radius_must_fit():
    # the limit binds at reflex corners, where the fillet disc must fit
    lshape = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
    with pytest.raises(RoundingTooLarge):
        PolygonalDomain.from_vertices(lshape, rounding_radius=5.0)
    # convex polygons carry no reflex fillet, any radius is admissible
    dom = PolygonalDomain.from_vertices(SQUARE, rounding_radius=0.8)
    assert np.isinf(dom.report.max_admissible_rounding)
    assert len(dom.arcs()) == 0


def test_bundled_domains_all_build():
    for name in BUNDLED_DOMAINS:
        dom = bundled_domain(name)
        assert dom.report.is_simple
        assert dom.rounding_radius > 0
        assert dom.cone_radius > 0
        assert 0 < dom.cone_angle < np.pi / 2


def test_reflex_indices():
    assert bundled_domain("unit_square").reflex_indices == ()
    assert bundled_domain("ngon20").reflex_indices == ()
    assert len(bundled_domain("lshape").reflex_indices) == 1
    assert len(bundled_domain("zchannel").reflex_indices) == 2
    assert len(bundled_domain("star5").reflex_indices) == 5


def test_domain_json_round_trip():
    for name in BUNDLED_DOMAINS:
        dom = bundled_domain(name)
        back = PolygonalDomain.from_json_dict(dom.to_json_dict())
        assert np.array_equal(back.verts, dom.verts)
        assert back.rounding_radius == dom.rounding_radius
        assert back.cone_radius == dom.cone_radius
        assert back.cone_angle == dom.cone_angle


def test_contains_classification():
    dom = bundled_domain("unit_square")
    assert contains(dom, (0.5, 0.5), "sharp") == "interior"
    assert contains(dom, (0.0, 0.5), "sharp") == "boundary"
    assert contains(dom, (1.5, 0.5), "sharp") == "exterior"
    assert contains(dom, (-1e-6, 0.5), "sharp") == "exterior"


def test_rounded_mode_adds_reflex_sliver():
    # points between a reflex corner and its fillet arc belong only to the
    # rounded closure
    dom = bundled_domain("lshape")
    p = (1.01, 1.01)
    assert contains(dom, p, "sharp") == "exterior"
    assert contains(dom, p, "rounded") == "interior"


def test_points_inside_matches_contains():
    rng = np.random.default_rng(7)
    for name in ("lshape", "star5", "ngon20"):
        dom = bundled_domain(name)
        lo = dom.verts.min(axis=0) - 0.2
        hi = dom.verts.max(axis=0) + 0.2
        pts = rng.uniform(lo, hi, size=(400, 2))
        for mode in ("sharp", "rounded"):
            mask = points_inside(dom, pts, mode)
            for p, m in zip(pts, mask):
                assert m == (contains(dom, p, mode) != "exterior")


def test_projection_identity_inside():
    dom = bundled_domain("lshape")
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.1, 0.9, size=(50, 2))
    out = project_points(dom, pts, "sharp")
    assert np.array_equal(out, pts)


def test_projection_lands_on_boundary():
    dom = bundled_domain("unit_square")
    proj = project_to_closure(dom, (1.4, 0.5), "sharp")
    assert np.allclose(proj.point, (1.0, 0.5))
    assert proj.distance == pytest.approx(0.4)
    # projected points pass membership
    assert contains(dom, proj.point, "sharp") != "exterior"


def test_projection_batch_containment():
    rng = np.random.default_rng(11)
    for name in BUNDLED_DOMAINS:
        dom = bundled_domain(name)
        lo = dom.verts.min(axis=0) - 0.3
        hi = dom.verts.max(axis=0) + 0.3
        pts = rng.uniform(lo, hi, size=(200, 2))
        for mode in ("sharp", "rounded"):
            out = project_points(dom, pts, mode)
            assert points_inside(dom, out, mode).all()


def test_boundary_clearance_is_conservative():
    # clearance never exceeds the true distance to the boundary, so walking
    # less than clearance keeps a point inside
    rng = np.random.default_rng(23)
    for name in ("unit_square", "lshape", "star5"):
        dom = bundled_domain(name)
        lo = dom.verts.min(axis=0)
        hi = dom.verts.max(axis=0)
        pts = rng.uniform(lo, hi, size=(300, 2))
        for mode in ("sharp", "rounded"):
            mask = points_inside(dom, pts, mode)
            inner = pts[mask]
            cl = boundary_clearance(dom, inner, mode)
            assert (cl >= 0).all()
            ang = rng.uniform(0, 2 * np.pi, size=inner.shape[0])
            step = np.column_stack([np.cos(ang), np.sin(ang)])
            moved = inner + 0.999 * cl[:, None] * step
            assert points_inside(dom, moved, mode).all()


def test_segment_in_closure():
    dom = bundled_domain("lshape")
    assert segment_in_closure(dom, np.array([0.5, 0.5]), np.array([1.5, 0.5]))
    # crossing the notch is out
    assert not segment_in_closure(dom, np.array([1.9, 0.9]), np.array([0.9, 1.9]))


def test_project_points_outside_raises_nothing_and_clamps():
    dom = bundled_domain("zchannel")
    far = np.array([[50.0, 50.0], [-50.0, -50.0]])
    out = project_points(dom, far, "sharp")
    assert points_inside(dom, out, "sharp").all()


def test_exterior_probe_raises_in_metric_entry_points():
    from cat0_pursuit import intrinsic_distance

    dom = bundled_domain("unit_square")
    with pytest.raises(PointOutsideDomain):
        intrinsic_distance(dom, (0.5, 0.5), (2.0, 0.5), "sharp")
