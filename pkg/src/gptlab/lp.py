"""Dense two-phase simplex with Bland's rule over exact or floating scalars.

Problems are stated in the general form::

    minimize    c . x
    subject to  A_ub x <= b_ub
                A_eq x == b_eq
                x[j] >= 0 for j in the nonnegative set, free otherwise

Infeasible problems come back with a Farkas certificate ``(lam, mu)``:
``lam >= 0``, ``g = A_ub^T lam + A_eq^T mu`` is >= 0 on nonnegative
variables and 0 on free ones, and ``b_ub . lam + b_eq . mu < 0``.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import config
from .scalar import is_exact, promote, zeros


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: object = None
    objective: object = None
    farkas: object = None  # (lam, mu) when infeasible

    @property
    def feasible(self):
        return self.status != "infeasible"


def _prepare(n, c, A_ub, b_ub, A_eq, b_eq, exact_mode):
    def mat(A, rows):
        if A is None:
            return zeros((0, n), exact_mode)
        A = np.asarray(A)
        return A.reshape(rows, n) if A.size else zeros((0, n), exact_mode)

    def vec(b):
        if b is None:
            return zeros((0,), exact_mode)
        return np.asarray(b).reshape(-1)

    b_ub, b_eq = vec(b_ub), vec(b_eq)
    A_ub, A_eq = mat(A_ub, len(b_ub)), mat(A_eq, len(b_eq))
    if c is None:
        c = zeros((n,), exact_mode)
    return np.asarray(c).reshape(-1), A_ub, b_ub, A_eq, b_eq


class _Tableau:
    """Tableau rows [A | b] with a basis list; Bland pivoting."""

    def __init__(self, A, b, exact_mode, start=None):
        self.exact = exact_mode
        self.eps = 0 if exact_mode else config.get_eps()
        m, n = A.shape
        self.n = n
        self.T = np.concatenate([A, zeros((m, m), exact_mode), b.reshape(m, 1)], axis=1)
        one = Fraction(1) if exact_mode else 1.0
        for i in range(m):
            self.T[i, n + i] = one
        self.art = set(n + i for i in range(m))
        self.basis = [n + i if start is None or start[i] is None else start[i] for i in range(m)]

    def pos(self, x):
        return x > self.eps

    def neg(self, x):
        return x < -self.eps

    def pivot(self, r, c):
        T = self.T
        T[r] = T[r] / T[r, c]
        for i in range(T.shape[0]):
            if i != r and T[i, c] != 0:
                T[i] = T[i] - T[i, c] * T[r]
        if not self.exact:
            T[np.abs(T) <= 1e-3 * self.eps] = 0.0
        self.basis[r] = c

    def reduced_costs(self, cost):
        cb = np.array([cost[j] for j in self.basis], dtype=self.T.dtype)
        body = self.T[:, :-1]
        z = cb @ body if len(cb) else zeros((body.shape[1],), self.exact)
        return cost - z

    def run(self, cost, allowed):
        """Minimize cost over the current basis; returns 'optimal'/'unbounded'."""
        for _ in range(100_000):
            red = self.reduced_costs(cost)
            enter = next((j for j in range(len(red)) if allowed[j] and self.neg(red[j])), None)
            if enter is None:
                return "optimal"
            rows = [i for i in range(self.T.shape[0]) if self.pos(self.T[i, enter])]
            if not rows:
                return "unbounded"
            ratios = {i: self.T[i, -1] / self.T[i, enter] for i in rows}
            lo = min(ratios.values())
            ties = [i for i in rows if ratios[i] <= lo + self.eps]
            leave = min(ties, key=lambda i: self.basis[i])
            self.pivot(leave, enter)
        raise RuntimeError("simplex iteration limit reached")

    def value(self, cost):
        return sum((cost[j] * self.T[i, -1] for i, j in enumerate(self.basis)),
                   Fraction(0) if self.exact else 0.0)


def linprog(c=None, A_ub=None, b_ub=None, A_eq=None, b_eq=None, nonneg=True, n=None):
    """Solve a small LP exactly (object arrays) or in floating point."""
    arrays = [x for x in (c, A_ub, b_ub, A_eq, b_eq) if x is not None and np.asarray(x).size]
    exact_mode = all(is_exact(x) for x in arrays) if arrays else True
    if n is None:
        for x, is_mat in ((c, False), (A_ub, True), (A_eq, True)):
            if x is not None and np.asarray(x).size:
                n = np.asarray(x).shape[-1]
                break
    if n is None:
        raise ValueError("cannot infer the number of variables")
    c, A_ub, b_ub, A_eq, b_eq = _prepare(n, c, A_ub, b_ub, A_eq, b_eq, exact_mode)
    c, A_ub, b_ub, A_eq, b_eq = promote(c, A_ub, b_ub, A_eq, b_eq)
    exact_mode = is_exact(c)

    if isinstance(nonneg, bool):
        nonneg = [nonneg] * n
    free = [j for j in range(n) if not nonneg[j]]

    # standard form columns: x (split free vars), then slacks for ub rows
    m_ub, m_eq = len(b_ub), len(b_eq)
    A_rows = np.concatenate([A_ub, A_eq], axis=0)
    cols = [A_rows] + ([-A_rows[:, free]] if free else [])
    slack = zeros((m_ub + m_eq, m_ub), exact_mode)
    for i in range(m_ub):
        slack[i, i] = Fraction(1) if exact_mode else 1.0
    A_std = np.concatenate(cols + [slack], axis=1)
    b_std = np.concatenate([b_ub, b_eq])
    c_std = np.concatenate([c, -c[free] if free else c[:0], zeros((m_ub,), exact_mode)])
    signs = []
    for i in range(len(b_std)):
        s = -1 if b_std[i] < 0 else 1
        signs.append(s)
        if s < 0:
            A_std[i] = -A_std[i]
            b_std[i] = -b_std[i]
    m, n_std = A_std.shape

    # ub rows with b >= 0 start from their slack column (same unit column as
    # the artificial, so the artificial block still tracks B^-1)
    slack0 = A_rows.shape[1] + len(free)
    start = [slack0 + i if i < m_ub and signs[i] > 0 else None for i in range(m)]
    tab = _Tableau(A_std, b_std, exact_mode, start)
    one = Fraction(1) if exact_mode else 1.0
    phase1 = np.concatenate([zeros((n_std,), exact_mode), np.array([one] * m, dtype=A_std.dtype)])
    allowed1 = [True] * n_std + [start[i] is None for i in range(m)]
    tab.run(phase1, allowed1)
    infeas = tab.value(phase1)
    if infeas > tab.eps * max(1, m):
        binv = tab.T[:, n_std:n_std + m]
        cb = np.array([phase1[j] for j in tab.basis], dtype=A_std.dtype)
        y = cb @ binv
        z = -y
        mult = np.array([z[i] * signs[i] for i in range(m)], dtype=A_std.dtype)
        return LPResult("infeasible", farkas=(mult[:m_ub], mult[m_ub:]))

    # drive artificial variables out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if tab.basis[r] in tab.art:
            col = next((j for j in range(n_std) if abs(tab.T[r, j]) > tab.eps), None)
            if col is None:
                continue
            tab.pivot(r, col)
        keep.append(r)
    tab.T = tab.T[keep]
    tab.basis = [tab.basis[r] for r in keep]

    cost = np.concatenate([c_std, zeros((m,), exact_mode)])
    allowed = [True] * n_std + [False] * m
    status = tab.run(cost, allowed)
    if status == "unbounded":
        return LPResult("unbounded")
    xs = zeros((n_std,), exact_mode)
    for i, j in enumerate(tab.basis):
        if j < n_std:
            xs[j] = tab.T[i, -1]
    x = xs[:n].copy()
    for k, j in enumerate(free):
        x[j] = x[j] - xs[n + k]
    return LPResult("optimal", x=x, objective=c @ x)


def lp_feasible(A_eq=None, b_eq=None, A_ub=None, b_ub=None, nonneg=False, n=None):
    """Feasibility of {A_eq x = b_eq, A_ub x <= b_ub}; variables free by default."""
    return linprog(None, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, nonneg=nonneg, n=n)


def check_feasible_point(x, A_eq=None, b_eq=None, A_ub=None, b_ub=None, nonneg=False):
    """Direct substitution check of a witness point."""
    x = np.asarray(x)
    e = 0 if is_exact(x) else config.get_eps() * 100
    if A_eq is not None and np.asarray(A_eq).size:
        r = np.asarray(A_eq) @ x - np.asarray(b_eq)
        if any(abs(v) > e for v in r):
            return False
    if A_ub is not None and np.asarray(A_ub).size:
        r = np.asarray(A_ub) @ x - np.asarray(b_ub)
        if any(v > e for v in r):
            return False
    if isinstance(nonneg, bool):
        nonneg = [nonneg] * len(x)
    return all(x[j] >= -e for j in range(len(x)) if nonneg[j])


def check_farkas(farkas, A_eq=None, b_eq=None, A_ub=None, b_ub=None, nonneg=False, n=None):
    """Verify an infeasibility certificate by substitution."""
    lam, mu = (np.asarray(v) for v in farkas)
    exact_mode = is_exact(lam) and is_exact(mu)
    e = 0 if exact_mode else config.get_eps() * 100
    if n is None:
        n = np.asarray(A_eq if A_eq is not None and np.asarray(A_eq).size else A_ub).shape[1]
    g = zeros((n,), exact_mode)
    rhs = Fraction(0) if exact_mode else 0.0
    if len(lam):
        if any(v < -e for v in lam):
            return False
        g = g + np.asarray(A_ub).T @ lam
        rhs = rhs + np.asarray(b_ub) @ lam
    if len(mu):
        g = g + np.asarray(A_eq).T @ mu
        rhs = rhs + np.asarray(b_eq) @ mu
    if isinstance(nonneg, bool):
        nonneg = [nonneg] * n
    for j in range(n):
        if nonneg[j] and g[j] < -e:
            return False
        if not nonneg[j] and abs(g[j]) > e:
            return False
    return rhs < -e if not exact_mode else rhs < 0
