import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gptlab.bitcommit import (
    NotFound,
    cheat_binding,
    binding_series,
    committed_mixture,
    exposing_effect,
    find_double_decomposition,
    hiding_check,
    honest_acceptance,
    maxmin_cheat_value,
    run_honest,
    scheme_violations,
    simulate_honest,
)
from gptlab.scalar import to_float
from gptlab.statespace import make_classical, make_irregular_hexagon, make_polygon


@pytest.fixture(scope="module")
def square_scheme():
    return find_double_decomposition(make_polygon(4))


@pytest.fixture(scope="module")
def pentagon_scheme():
    return find_double_decomposition(make_polygon(5))


def _g(scheme, sigma):
    sigma = to_float(np.asarray(sigma))
    return [max(float(to_float(np.asarray(a)) @ sigma) for a in scheme.exposers(b)) for b in (0, 1)]


def test_simplex_has_no_scheme():
    for n in (1, 2, 3):
        res = find_double_decomposition(make_classical(n))
        assert isinstance(res, NotFound)
        assert not res


def test_square_scheme_is_two_diagonals(square_scheme):
    s = square_scheme
    assert s.size == 4
    assert list(s.omega) == [0, 0, 1]
    assert [p for p, _ in s.decomp0] == [Fraction(1, 2)] * 2
    assert scheme_violations(s) == []


@pytest.mark.parametrize("make", [lambda: make_polygon(5), lambda: make_polygon(6),
                                  make_irregular_hexagon])
def test_schemes_on_other_polygons(make):
    s = find_double_decomposition(make())
    assert s
    assert scheme_violations(s) == []


def test_violations_are_reported(square_scheme):
    s = square_scheme
    bad = type(s)(s.space, s.omega, s.decomp0, s.decomp0, s.exposers0, s.exposers0)
    assert "the two decompositions share a state" in scheme_violations(bad)


def test_exposing_effect_on_square_vertex():
    A = make_polygon(4)
    v = A.omega_vertices[0]
    e = exposing_effect(A, v)
    vals = A.omega_vertices @ e.effect
    assert vals[0] == 1
    assert all(x <= 1 - e.gap for x in vals[1:])
    assert all(x >= 0 for x in vals)


def test_exposing_effect_rejects_non_vertex():
    A = make_polygon(4)
    with pytest.raises(ValueError):
        exposing_effect(A, A.unit)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_perfect_hiding(square_scheme, n):
    assert hiding_check(square_scheme, n).hiding


def test_hiding_against_independent_expansion(square_scheme):
    # the committed state for n = 2 from explicit Kronecker products
    s = square_scheme
    for b in (0, 1):
        total = sum(float(p * q) * np.kron(to_float(m), to_float(k))
                    for (p, m), (q, k) in itertools.product(s.decomp(b), repeat=2))
        assert np.allclose(to_float(committed_mixture(s, b, 2)), total)


def test_hiding_fails_for_mismatched_decompositions(square_scheme):
    s = square_scheme
    A = s.space
    V = A.omega_vertices
    skew = type(s)(A, s.omega, s.decomp0, [(Fraction(1), V[1])], s.exposers0, [s.exposers1[0]])
    verdict = hiding_check(skew, 1)
    assert not verdict
    assert verdict.difference is not None


@pytest.mark.parametrize("n", [1, 2, 3])
def test_honest_acceptance_is_exactly_one(square_scheme, n):
    for b in (0, 1):
        assert honest_acceptance(square_scheme, b, n) == 1


def test_simulated_honest_runs_always_accept(square_scheme, pentagon_scheme):
    for s in (square_scheme, pentagon_scheme):
        for b in (0, 1):
            assert simulate_honest(s, b, 5, 2000, seed=b) == 1.0


def test_run_honest_is_seeded(square_scheme):
    a = run_honest(square_scheme, 1, 8, seed=42)
    b = run_honest(square_scheme, 1, 8, seed=42)
    assert a == b
    assert a.accept and a.revealed == 1
    assert all(0 <= i < 2 for i in a.x)
    with pytest.raises(ValueError):
        run_honest(square_scheme, 0, 0)


def test_binding_on_square_is_power_of_half(square_scheme):
    for n in range(1, 13):
        assert cheat_binding(square_scheme, n).probability == Fraction(1, 2 ** n)


def test_binding_series_slope(square_scheme):
    rows = binding_series(square_scheme, range(1, 21))
    logs = np.array([lg for _, _, lg in rows])
    slope = np.polyfit(np.arange(1, 21), logs, 1)[0]
    assert abs(slope + 1) < 1e-9


def test_binding_n1_against_grid_search(square_scheme):
    # max over the whole square of g0 + g1 - 1, on a 201 x 201 grid
    s = square_scheme
    xs = np.linspace(-1, 1, 201)
    best = max(sum(_g(s, [x, y, 1.0])) - 1 for x in xs for y in xs)
    assert best == pytest.approx(float(cheat_binding(s, 1).probability), abs=1e-12)


def test_binding_n1_pentagon_against_grid_search(pentagon_scheme):
    s = pentagon_scheme
    V = to_float(s.space.omega_vertices)
    rng = np.random.default_rng(5)
    W = rng.dirichlet(np.full(len(V), 0.3), size=4000)
    pts = np.vstack([V, W @ V])
    best = max(sum(_g(s, p)) - 1 for p in pts)
    claim = float(cheat_binding(s, 1).probability)
    assert best <= claim + 1e-9
    assert best == pytest.approx(claim, abs=1e-9)


@pytest.mark.parametrize("n", [2, 3])
def test_binding_against_vertex_brute_force(square_scheme, pentagon_scheme, n):
    for s in (square_scheme, pentagon_scheme):
        gs = [_g(s, v) for v in s.space.omega_vertices]
        brute = max(np.prod([gs[i][0] for i in c]) + np.prod([gs[i][1] for i in c]) - 1
                    for c in itertools.product(range(len(gs)), repeat=n))
        assert float(cheat_binding(s, n).probability) == pytest.approx(brute, abs=1e-12)


@settings(max_examples=30)
@given(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
       st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4))
def test_mixed_product_strategies_never_beat_binding(square_scheme, w1, w2):
    s = square_scheme
    V = to_float(s.space.omega_vertices)
    sig = [np.asarray(w) / sum(w) @ V for w in (w1, w2)]
    g = [_g(s, x) for x in sig]
    val = g[0][0] * g[1][0] + g[0][1] * g[1][1] - 1
    assert val <= 0.25 + 1e-12


def test_maxmin_value_on_square(square_scheme):
    assert maxmin_cheat_value(square_scheme) == Fraction(3, 4)


def test_cheat_binding_rejects_zero(square_scheme):
    with pytest.raises(ValueError):
        cheat_binding(square_scheme, 0)
    with pytest.raises(ValueError):
        hiding_check(square_scheme, 0)
