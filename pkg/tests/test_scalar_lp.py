"""Exact linear algebra and the simplex solver against numpy and scipy."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog as scipy_linprog

from gptlab.lp import check_farkas, check_feasible_point, linprog, lp_feasible
from gptlab.scalar import (
    decode,
    encode,
    exact,
    format_scalar,
    inv,
    is_exact,
    nullspace,
    parse_scalar,
    rank,
    solve,
    to_float,
)

small_ints = st.integers(-4, 4)


def int_matrix(rows, cols):
    return st.lists(st.lists(small_ints, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@given(st.integers(1, 5).flatmap(lambda r: st.integers(1, 5).flatmap(lambda c: int_matrix(r, c))))
def test_rank_matches_numpy(rows):
    M = exact(rows)
    assert rank(M) == np.linalg.matrix_rank(np.array(rows, dtype=float))


@given(st.integers(1, 5).flatmap(lambda r: st.integers(1, 5).flatmap(lambda c: int_matrix(r, c))))
def test_nullspace_is_exact_kernel(rows):
    M = exact(rows)
    N = nullspace(M)
    assert N.shape[1] == M.shape[1] - rank(M)
    assert all(x == 0 for x in (M @ N).reshape(-1))


@given(int_matrix(4, 4), st.lists(small_ints, min_size=4, max_size=4))
def test_solve_and_inverse(rows, b):
    M = exact(rows)
    x = solve(M, exact(b))
    if rank(M) == 4:
        assert list(M @ x) == list(exact(b))
        assert (inv(M) @ M == exact(np.eye(4, dtype=int))).all()
    elif x is not None:
        assert list(M @ x) == list(exact(b))


def test_scalar_encoding_round_trip():
    a = exact([["1/3", 2], [-5, "7/4"]])
    data = encode(a)
    assert data == [["1/3", "2"], ["-5", "7/4"]]
    assert (decode(data, True) == a).all()
    f = np.array([0.1, 1e-20, 3.0])
    assert decode(encode(f), False).tolist() == f.tolist()
    assert format_scalar(Fraction(-2, 6)) == "-1/3"
    assert parse_scalar("3/9") == Fraction(1, 3)
    assert not is_exact(to_float(a))


def test_simplex_known_optimum():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6  ->  (8/5, 6/5), value 14/5
    c = exact([-1, -1])
    res = linprog(c, exact([[1, 2], [3, 1]]), exact([4, 6]))
    assert res.status == "optimal"
    assert list(res.x) == [Fraction(8, 5), Fraction(6, 5)]
    assert res.objective == Fraction(-14, 5)


def test_unbounded_and_infeasible():
    res = linprog(exact([-1, 0]), exact([[0, 1]]), exact([1]))
    assert res.status == "unbounded"
    res = lp_feasible(A_eq=exact([[1, 1]]), b_eq=exact([-1]), nonneg=True)
    assert not res.feasible
    assert check_farkas(res.farkas, A_eq=exact([[1, 1]]), b_eq=exact([-1]), nonneg=True)


@given(int_matrix(3, 3), st.lists(st.integers(-3, 6), min_size=3, max_size=3),
       st.lists(small_ints, min_size=3, max_size=3))
def test_simplex_agrees_with_scipy(A, b, c):
    # box constraints keep every instance bounded
    A_ub = exact(A + [[1 if i == j else 0 for j in range(3)] for i in range(3)])
    b_ub = exact(b + [5, 5, 5])
    ours = linprog(exact(c), A_ub, b_ub)
    ref = scipy_linprog(c, A_ub=np.array(to_float(A_ub)), b_ub=np.array(to_float(b_ub)),
                        bounds=(0, None), method="highs")
    if ref.status == 2:
        assert ours.status == "infeasible"
        assert check_farkas(ours.farkas, A_ub=A_ub, b_ub=b_ub, nonneg=True)
    else:
        assert ours.status == "optimal"
        assert abs(float(ours.objective) - ref.fun) < 1e-7
        assert check_feasible_point(ours.x, A_ub=A_ub, b_ub=b_ub, nonneg=True)


@given(int_matrix(3, 4), st.lists(small_ints, min_size=3, max_size=3))
def test_free_variable_feasibility_matches_scipy(A, b):
    ours = lp_feasible(A_eq=exact(A), b_eq=exact(b))
    ref = scipy_linprog(np.zeros(4), A_eq=np.array(A, dtype=float), b_eq=np.array(b, dtype=float),
                        bounds=(None, None), method="highs")
    assert ours.feasible == (ref.status == 0)
    if ours.feasible:
        assert check_feasible_point(ours.x, A_eq=exact(A), b_eq=exact(b))
    else:
        assert check_farkas(ours.farkas, A_eq=exact(A), b_eq=exact(b))


def test_tampered_farkas_certificate_fails():
    A_eq, b_eq = exact([[1, 1]]), exact([-1])
    res = lp_feasible(A_eq=A_eq, b_eq=b_eq, nonneg=True)
    lam, mu = res.farkas
    assert not check_farkas((lam, -mu), A_eq=A_eq, b_eq=b_eq, nonneg=True)


def test_float_mode_simplex():
    res = linprog(np.array([-1.0, -1.0]), np.array([[1.0, 2.0], [3.0, 1.0]]), np.array([4.0, 6.0]))
    assert res.status == "optimal"
    assert res.x == pytest.approx([1.6, 1.2])
