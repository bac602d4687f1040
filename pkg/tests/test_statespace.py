"""State spaces, effects, maps, order isomorphisms and symmetries."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog as scipy_linprog

from gptlab.errors import DimensionMismatch
from gptlab.geometry import Cone
from gptlab.scalar import exact, inv, to_float
from gptlab.statespace import (
    StateSpace,
    base_norm,
    dual_space,
    is_effect,
    is_norm_contractive,
    is_positive_map,
    is_weakly_self_dual,
    make_classical,
    make_irregular_hexagon,
    make_polygon,
    order_isomorphisms,
    polygon_group,
    space_from_rays,
    symmetries,
    validate_observable,
    vertex_permutation_map,
)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
def test_polygon_shapes(n):
    A = make_polygon(n)
    assert A.dim == 3
    assert len(A.cone.rays) == n and len(A.cone.facets) == n
    assert A.exact == (n in (3, 4, 6))
    assert np.allclose(np.array(to_float(A.omega_vertices @ A.unit), dtype=float), 1)


def test_classical_is_simplex():
    A = make_classical(4)
    assert A.is_simplex() and A.label == "classical(4)"
    assert list(A.center) == [Fraction(1, 4)] * 4


def scipy_base_norm(A, v):
    R = np.array(to_float(A.cone.rays), dtype=float)
    u = R @ np.array(to_float(A.unit), dtype=float)
    res = scipy_linprog(np.concatenate([u, u]), A_eq=np.concatenate([R.T, -R.T], axis=1),
                        b_eq=np.array(to_float(v), dtype=float), bounds=(0, None), method="highs")
    return res.fun


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_base_norm_agrees_with_scipy(v):
    A = make_polygon(4)
    v = exact(v)
    assert abs(float(base_norm(A, v)) - scipy_base_norm(A, v)) < 1e-9


@given(st.lists(st.integers(0, 5), min_size=4, max_size=4))
def test_base_norm_is_unit_on_the_cone(w):
    A = make_polygon(4)
    v = exact(w) @ A.cone.rays
    assert base_norm(A, v) == v @ A.unit


def test_base_norm_of_orthogonal_states():
    A = make_classical(3)
    assert base_norm(A, exact([1, -1, 0])) == 2


def test_effects_and_observables():
    A = make_polygon(4)
    a = exact(["1/2", 0, "1/2"])
    assert is_effect(A, a) and is_effect(A, A.unit - a)
    assert validate_observable(A, [a, A.unit - a])
    assert not is_effect(A, exact([1, 0, 1]))
    bad = validate_observable(A, [a, a])
    assert not bad and list(bad.residual) == list(A.unit - 2 * a)
    with pytest.raises(DimensionMismatch):
        is_effect(A, exact([1, 0]))


def test_positive_and_contractive_maps():
    A = make_polygon(4)
    I = exact(np.eye(3, dtype=int))
    assert is_positive_map(I, A, A) and is_norm_contractive(I, A, A)
    assert not is_positive_map(-I, A, A)
    assert not is_norm_contractive(2 * I, A, A)


def test_unit_must_be_strictly_positive():
    with pytest.raises(ValueError):
        StateSpace(Cone.from_rays(exact([[1, 0], [0, 1]])), exact([1, 0]))


def brute_force_order_iso_exists(A, B):
    """Float oracle: try every bijection of extreme rays, independent of the library search.

    A bijection is induced by a linear map when basis scales s > 0 exist with
    T (basis ray i) = s_i (target i) and every other ray lands on a positive
    multiple of its target. One extra ray fixes s up to a common factor.
    """
    RA = np.array(to_float(A.cone.rays), dtype=float)
    RB = np.array(to_float(B.cone.rays), dtype=float)
    if len(RA) != len(RB):
        return False
    d = RA.shape[1]
    basis = list(next(idx for idx in itertools.combinations(range(len(RA)), d)
                      if abs(np.linalg.det(RA[list(idx)])) > 1e-9))
    extra = next(k for k in range(len(RA)) if k not in basis)
    coef = np.linalg.solve(RA[basis].T, RA[extra])
    for perm in itertools.permutations(range(len(RB))):
        target = RB[list(perm)]
        M = (target[basis] * coef[:, None]).T
        s, *_ = np.linalg.lstsq(M, target[extra], rcond=None)
        if np.abs(M @ s - target[extra]).max() > 1e-7 or np.any(s <= 1e-9):
            continue
        T = (target[basis] * s[:, None]).T @ np.linalg.inv(RA[basis].T)
        img = RA @ T.T
        c = np.einsum("ij,ij->i", img, target) / np.einsum("ij,ij->i", target, target)
        if np.all(c > 1e-9) and np.abs(img - c[:, None] * target).max() <= 1e-7:
            return True
    return False


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
def test_regular_polygons_are_weakly_self_dual(n):
    A = make_polygon(n)
    v = is_weakly_self_dual(A)
    assert v
    D = v.dual
    J = v.isomorphism.matrix
    assert is_positive_map(J, A, D)
    assert is_positive_map(inv(J), D, A)


def test_irregular_hexagon_is_not_weakly_self_dual():
    A = make_irregular_hexagon()
    assert not is_weakly_self_dual(A)
    assert not brute_force_order_iso_exists(A, dual_space(A))
    # sanity check of the oracle on a space that is self-dual
    assert brute_force_order_iso_exists(make_polygon(4), dual_space(make_polygon(4)))


def brute_force_symmetry_count(A):
    n = len(A.omega_vertices)
    return sum(vertex_permutation_map(A, list(p)) is not None for p in itertools.permutations(range(n)))


@pytest.mark.parametrize("make,expected", [
    (lambda: make_polygon(3), 6), (lambda: make_polygon(4), 8),
    (lambda: make_polygon(5), 10), (lambda: make_polygon(6), 12),
    (make_irregular_hexagon, 1), (lambda: make_classical(3), 6),
])
def test_symmetry_counts(make, expected):
    A = make()
    G = symmetries(A)
    assert len(G) == expected
    assert brute_force_symmetry_count(A) == expected
    for g in G:
        assert is_positive_map(g, A, A)


def test_polygon_groups():
    A = make_polygon(6)
    assert len(polygon_group(A, "cyclic")) == 6
    assert len(polygon_group(A, "dihedral")) == 12


def test_order_isomorphisms_between_classical_spaces():
    A = make_classical(3)
    isos = list(order_isomorphisms(A, A))
    assert len(isos) == 6


def test_dual_space_has_barycentric_unit():
    A = make_polygon(4)
    D = dual_space(A)
    assert list(D.unit) == list(A.center)
    assert len(D.cone.rays) == 4


def test_space_from_rays_prunes_interior_generators():
    A = space_from_rays(exact([[1, 0, 1], [0, 1, 1], [-1, -1, 1], [0, 0, 1]]), exact([0, 0, 1]))
    assert len(A.cone.rays) == 3


@pytest.mark.parametrize("make", [make_classical, make_polygon], ids=["classical", "polygon"])
@pytest.mark.parametrize("n", [3, 4])
def test_dual_order_structure_ignores_the_unit(make, n):
    # the barycenter is only a convention: any interior unit gives the same
    # cone, so order isomorphisms A -> A* exist or not regardless of it
    A = make(n)
    other = A.cone.rays[0] * Fraction(1, 2) + A.center
    D1, D2 = dual_space(A), dual_space(A, unit=other)
    assert sorted(map(tuple, D1.cone.rays)) == sorted(map(tuple, D2.cone.rays))
    assert (next(iter(order_isomorphisms(A, D1)), None) is None) == \
        (next(iter(order_isomorphisms(A, D2)), None) is None)
