"""Cones: double description against scipy's convex hull, duality, membership."""

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.optimize import linprog as scipy_linprog
from scipy.spatial import ConvexHull

from gptlab import config
from gptlab.errors import NotGenerating, NotPointed
from gptlab.geometry import (
    Cone,
    canonical_ray,
    cone_contains,
    direct_sum,
    dual_cone,
    extreme_rays,
    orthant,
    polyhedral_cone_rays,
    same_ray_set,
    verify_membership,
)
from gptlab.scalar import exact, to_float

points2d = st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=3, max_size=12, unique=True)


def lifted(pts):
    return exact([[x, y, 1] for x, y in pts])


def hull_vertices(pts):
    try:
        hull = ConvexHull(np.array(pts, dtype=float))
    except Exception:
        return None
    return {tuple(pts[i]) for i in hull.vertices}


@given(points2d)
def test_extreme_rays_match_convex_hull(pts):
    ref = hull_vertices(pts)
    assume(ref is not None and len(ref) >= 3)
    c = Cone.from_rays(lifted(pts))
    got = {(int(r[0] / r[2]), int(r[1] / r[2])) for r in c.rays}
    assert got == ref
    # a polygon has as many edges as vertices
    assert len(c.facets) == len(ref)


@given(points2d)
def test_dual_involution_on_random_cones(pts):
    assume((hull_vertices(pts) or set()).__len__() >= 3)
    c = Cone.from_rays(lifted(pts))
    d = Cone.from_rays(c.facets)
    assert same_ray_set(d.facets, c.rays)
    assert same_ray_set(dual_cone(dual_cone(c)).rays, c.rays)


@given(points2d, st.tuples(st.integers(-8, 8), st.integers(-8, 8), st.integers(-3, 3)))
def test_membership_agrees_with_scipy(pts, v):
    assume((hull_vertices(pts) or set()).__len__() >= 3)
    c = Cone.from_rays(lifted(pts))
    v = exact(list(v))
    m = cone_contains(c, v)
    R = np.array(to_float(c.rays), dtype=float)
    ref = scipy_linprog(np.zeros(len(R)), A_eq=R.T, b_eq=np.array(to_float(v), dtype=float),
                        bounds=(0, None), method="highs")
    assert bool(m) == (ref.status == 0)
    assert bool(m) == c.contains(v)
    assert verify_membership(c, v, m)


def test_orthant_is_self_dual():
    c = orthant(4)
    assert same_ray_set(dual_cone(c).rays, c.rays)
    assert len(extreme_rays(c.facets, 4)) == 4


def test_direct_sum_blocks():
    sq = Cone.from_rays(exact([[1, 1, 1], [-1, 1, 1], [-1, -1, 1], [1, -1, 1]]))
    c = direct_sum(sq, orthant(2))
    assert c.dim == 5 and len(c.rays) == 6 and len(c.facets) == 6
    assert same_ray_set(Cone(facets=c.facets).rays, c.rays)


def test_redundant_generators_are_dropped():
    c = Cone.from_rays(exact([[1, 0, 1], [0, 1, 1], [-1, -1, 1], [0, 0, 1], [2, 0, 2]]))
    assert len(c.rays) == 3


def test_canonical_ray_is_scale_free():
    assert list(canonical_ray(exact([2, 4, 6]))) == list(canonical_ray(exact(["1/3", "2/3", 1])))


def test_not_generating_and_not_pointed():
    with pytest.raises(NotGenerating):
        Cone.from_rays(exact([[1, 0, 0], [0, 1, 0]]))
    with pytest.raises(NotPointed):
        Cone.from_facets(exact([[1, 0, 0], [0, 1, 0]]))


def test_polyhedral_cone_rays_with_equalities():
    # the orthant cut by x0 = x1 is generated by (1, 1, 0) and (0, 0, 1)
    R = polyhedral_cone_rays(orthant(3).facets, exact([[1, -1, 0]]))
    assert same_ray_set(R, exact([[1, 1, 0], [0, 0, 1]]))
    # a cone squeezed to the origin
    assert len(polyhedral_cone_rays(orthant(2).facets, exact([[1, 1]]))) == 0


def test_float_mode_polygon_cone():
    n = 7
    pts = np.array([[np.cos(2 * np.pi * k / n), np.sin(2 * np.pi * k / n), 1.0] for k in range(n)])
    c = Cone.from_rays(pts)
    assert len(c.rays) == n and len(c.facets) == n
    assert same_ray_set(Cone.from_rays(c.facets).facets, pts)


@pytest.mark.parametrize("disable", [False, True])
def test_numba_and_numpy_paths_agree(monkeypatch, disable):
    monkeypatch.setattr(config, "DISABLE_NUMBA", disable)
    pts = [(x, y) for x, y in [(0, 0), (5, 0), (7, 2), (6, 6), (2, 7), (-1, 4), (3, 3)]]
    c = Cone(rays=lifted(pts))
    assert len(c.facets) == 6
