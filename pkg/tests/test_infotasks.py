"""Distinguishability, cloning/broadcasting and nondisturbing maps."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog as scipy_linprog

from gptlab.composite import kron, min_tensor
from gptlab.errors import ObservableMismatch, SearchBudgetExceeded
from gptlab.geometry import Cone, direct_sum, orthant
from gptlab.infotasks import (
    broadcast_set_of_map,
    build_cloner,
    check_distinguish,
    check_nondisturb,
    constant_preparation,
    in_nondisturbing_span,
    irreducible_decomposition,
    is_broadcastable,
    is_nondisturbing,
    jointly_distinguishable,
    marginal_maps,
    nondisturbing_basis,
    space_of_cone,
)
from gptlab.scalar import exact, inv, to_float
from gptlab.statespace import is_positive_map, make_classical, make_polygon, symmetries


def scipy_distinguishable(A, S):
    S = np.array(to_float(S), dtype=float)
    R = np.array(to_float(A.cone.rays), dtype=float)
    u = np.array(to_float(A.unit), dtype=float)
    n, d = S.shape
    A_eq = [np.concatenate([S[j] if i == k else np.zeros(d) for k in range(n)])
            for i in range(n) for j in range(n)]
    b_eq = [float(i == j) for i in range(n) for j in range(n)]
    for c in range(d):
        row = np.zeros(n * d)
        row[c::d] = 1
        A_eq.append(row)
        b_eq.append(u[c])
    A_ub = [np.concatenate([-r if i == k else np.zeros(d) for k in range(n)]) for i in range(n) for r in R]
    res = scipy_linprog(np.zeros(n * d), A_ub=np.array(A_ub), b_ub=np.zeros(len(A_ub)),
                        A_eq=np.array(A_eq), b_eq=np.array(b_eq), bounds=(None, None), method="highs")
    return res.status == 0


def test_antipodal_square_states_are_distinguishable():
    A = make_polygon(4)
    V = A.omega_vertices
    v = jointly_distinguishable(A, [V[0], V[2]])
    assert v
    assert [list(e) for e in v.effects] == [[Fraction(1, 2), 0, Fraction(1, 2)],
                                            [Fraction(-1, 2), 0, Fraction(1, 2)]]
    assert check_distinguish(A, [V[0], V[2]], v)


def test_all_square_vertices_are_not_distinguishable():
    A = make_polygon(4)
    v = jointly_distinguishable(A, list(A.omega_vertices))
    assert not v
    assert check_distinguish(A, list(A.omega_vertices), v)
    lam, mu = v.certificate
    v.certificate = (lam, -mu)
    assert not check_distinguish(A, list(A.omega_vertices), v)


@given(st.sets(st.integers(0, 5), min_size=1, max_size=4), st.booleans())
def test_distinguishability_agrees_with_scipy(idx, add_center):
    A = make_polygon(6)
    S = [A.omega_vertices[i] for i in sorted(idx)]
    if add_center:
        S.append(A.center)
    v = jointly_distinguishable(A, S)
    assert bool(v) == scipy_distinguishable(A, S)
    assert check_distinguish(A, S, v)


def test_classical_vertices_are_distinguishable():
    A = make_classical(4)
    assert jointly_distinguishable(A, list(A.omega_vertices))


def test_cloner_clones_and_is_positive():
    A = make_polygon(4)
    S = [A.omega_vertices[1], A.omega_vertices[3]]
    v = jointly_distinguishable(A, S)
    phi = build_cloner(A, S, v.effects)
    for s in S:
        assert list(phi(s)) == list(kron(s, s))
    assert is_positive_map(phi, A, min_tensor(A, A))
    with pytest.raises(ObservableMismatch):
        build_cloner(A, S, v.effects[::-1])


def test_constant_preparation_broadcasts_one_state():
    A = make_polygon(4)
    s = A.center
    phi = constant_preparation(A, s)
    MA, MB = marginal_maps(A, phi)
    assert list(MA @ s) == list(s) and list(MB @ s) == list(s)
    assert is_broadcastable(A, [s])


def test_broadcastability_of_square_subsets():
    A = make_polygon(4)
    V = A.omega_vertices
    yes = is_broadcastable(A, [V[0], (V[0] + V[2]) / 2])
    assert yes and yes.complete
    MA, MB = marginal_maps(A, yes.broadcaster)
    for g in [V[0], (V[0] + V[2]) / 2]:
        assert list(MA @ g) == list(g) and list(MB @ g) == list(g)
    # adjacent vertices are distinguished by (x + 1) / 2, three vertices are not
    assert is_broadcastable(A, [V[0], V[1]])
    assert not is_broadcastable(A, [V[0], V[1], V[2]])
    with pytest.raises(SearchBudgetExceeded):
        is_broadcastable(A, [V[0], V[1]], budget=1)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_broadcast_set_of_cloner_is_the_cloned_simplex(n):
    A = make_polygon(n)
    V = A.omega_vertices
    for i, j in itertools.combinations(range(n), 2):
        S = [V[i], V[j]]
        v = jointly_distinguishable(A, S)
        if not v:
            continue
        got = broadcast_set_of_map(A, build_cloner(A, S, v.effects))
        assert got.is_simplex and got.distinguishable and len(got.vertices) == 2
        G = np.array(to_float(got.vertices), dtype=float)
        for s in S:
            assert np.abs(G - np.array(to_float(s), dtype=float)).max(axis=1).min() < 1e-9


PIECES = {
    "square": (lambda: make_polygon(4).cone, 1),
    "ray": (lambda: orthant(1), 1),
    "quadrant": (lambda: orthant(2), 2),
    "triangle": (lambda: make_polygon(3).cone, 3),
}


@given(st.lists(st.sampled_from(sorted(PIECES)), min_size=1, max_size=3),
       st.integers(0, 1000))
def test_decomposition_counts_irreducible_parts(parts, seed):
    cone = direct_sum(*[PIECES[p][0]() for p in parts])
    # hide the block structure behind a unimodular change of coordinates
    rng = np.random.default_rng(seed)
    d = cone.dim
    U = np.eye(d, dtype=int)
    for _ in range(3 * d if d > 1 else 0):
        i, j = rng.choice(d, 2, replace=False)
        U[i] += int(rng.integers(-2, 3)) * U[j]
    Ue = exact(U)
    hidden = Cone.from_rays(cone.rays @ Ue.T)
    dec = irreducible_decomposition(hidden)
    assert len(dec) == sum(PIECES[p][1] for p in parts)
    total = sum(dec.projectors[1:], dec.projectors[0])
    assert (total == exact(np.eye(d, dtype=int))).all()


@given(st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_nonnegative_combinations_of_summand_identities_are_nondisturbing(c):
    sq = make_polygon(4)
    cone = direct_sum(sq.cone, orthant(2))
    basis = nondisturbing_basis(cone)
    M = sum((Fraction(x) * P.matrix for x, P in zip(c, basis)), basis[0].matrix * 0)
    v = is_nondisturbing(cone, M)
    assert v and [int(x) for x in v.constants] == c
    assert check_nondisturb(cone, M, v)
    assert list(in_nondisturbing_span(cone, M)) == [Fraction(x) for x in c]


def test_nontrivial_symmetries_disturb():
    A = make_polygon(4)
    syms = symmetries(A)
    I = exact(np.eye(3, dtype=int))
    for g in syms:
        v = is_nondisturbing(A.cone, g)
        assert bool(v) == bool((g == I).all())
        assert check_nondisturb(A.cone, g, v)
        assert (in_nondisturbing_span(A.cone, g) is not None) == bool(v)


def test_negative_scaling_is_rejected():
    cone = orthant(3)
    M = exact(np.diag([1, -1, 2]))
    v = is_nondisturbing(cone, M)
    assert not v and v.counterexample == 1 and "negative" in v.reason
    assert in_nondisturbing_span(cone, M) is None


def test_space_of_cone_unit():
    A = space_of_cone(direct_sum(make_polygon(4).cone, orthant(2)))
    assert all(x > 0 for x in A.cone.rays @ A.unit)
    assert inv(exact(np.eye(2, dtype=int)))[0, 0] == 1
