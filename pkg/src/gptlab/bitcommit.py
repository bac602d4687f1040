"""Bit commitment without entanglement on non-simplicial state spaces.

Alice commits to bit b by sampling n indices from p^b and sending the product
state of the corresponding mu^b_i. Both decompositions average to the same
state omega, which makes the commitment perfectly hiding. To reveal she
announces b and the string; Bob checks each subsystem with the exposing effect
of the announced state.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels, config
from .composite import kron_all
from .errors import NotExposed
from .lp import linprog
from .scalar import allclose, is_exact, nullspace, promote, rank, to_float, zeros


@dataclass
class ExposingEffect:
    effect: object
    gap: object


def _same(a, b):
    return allclose(np.asarray(a), np.asarray(b))


def exposing_effect(A, vertex):
    """Effect equal to 1 on ``vertex`` and at most 1 - gap on every other vertex.

    The gap is maximized by LP; a zero optimum means the vertex is not exposed.
    """
    V = A.omega_vertices
    v, _ = promote(np.asarray(vertex), V)
    V, _ = promote(V, v)
    hits = [k for k in range(len(V)) if _same(V[k], v)]
    if not hits:
        raise ValueError("vertex is not an extreme point of the state space")
    exact_mode = is_exact(V)
    one = Fraction(1) if exact_mode else 1.0
    d = A.dim
    # variables (a_1..a_d free, gap >= 0); maximize gap
    others = [k for k in range(len(V)) if k not in hits]
    ub, rhs = [], []
    for k in others:
        ub.append(np.concatenate([V[k], [one]]))
        rhs.append(one)
    for k in range(len(V)):
        ub.append(np.concatenate([-V[k], [one * 0]]))
        rhs.append(one * 0)
    ub.append(np.concatenate([zeros((d,), exact_mode), [one]]))
    rhs.append(one)
    A_ub = np.array(ub, dtype=V.dtype)
    b_ub = np.array(rhs, dtype=V.dtype)
    A_eq = np.array([np.concatenate([v, [one * 0]])], dtype=V.dtype)
    b_eq = np.array([one], dtype=V.dtype)
    c = np.concatenate([zeros((d,), exact_mode), [-one]]).astype(V.dtype)
    res = linprog(c, A_ub, b_ub, A_eq, b_eq, nonneg=[False] * d + [True])
    gap = res.x[d]
    if gap <= (0 if exact_mode else config.get_eps()):
        raise NotExposed("no effect exposes this vertex")
    return ExposingEffect(res.x[:d], gap)


@dataclass
class CommitmentScheme:
    space: object
    omega: object
    decomp0: list  # (p_i, mu_i)
    decomp1: list
    exposers0: list
    exposers1: list
    gaps0: list = field(default_factory=list)
    gaps1: list = field(default_factory=list)

    def decomp(self, b):
        return self.decomp0 if b == 0 else self.decomp1

    def exposers(self, b):
        return self.exposers0 if b == 0 else self.exposers1

    @property
    def verify_observables(self):
        """Bob's per-index two-outcome observables (a, u - a)."""
        u = self.space.unit
        return {b: [(a, u - a) for a in self.exposers(b)] for b in (0, 1)}

    @property
    def size(self):
        return len(self.decomp0) + len(self.decomp1)


@dataclass
class NotFound:
    reason: str

    def __bool__(self):
        return False


def scheme_violations(scheme):
    """Invariant violations of a commitment scheme (empty when valid)."""
    out = []
    A = scheme.space
    V = A.omega_vertices
    for b in (0, 1):
        dec = scheme.decomp(b)
        probs = np.array([p for p, _ in dec])
        if not all(p > 0 for p in probs):
            out.append(f"decomposition {b} has a nonpositive probability")
        if not allclose(probs.sum(), probs.sum() * 0 + 1):
            out.append(f"decomposition {b} probabilities do not sum to 1")
        mix = sum((p * m for p, m in dec), zeros((A.dim,), A.exact))
        if not allclose(mix, scheme.omega):
            out.append(f"decomposition {b} does not average to omega")
        if len(scheme.exposers(b)) != len(dec):
            out.append(f"decomposition {b} needs one exposer per state")
            continue
        for (p, mu), a in zip(dec, scheme.exposers(b)):
            vals = V @ np.asarray(a)
            on = [k for k in range(len(V)) if _same(V[k], mu)]
            if not on:
                out.append(f"state {mu} of decomposition {b} is not an extreme point")
                continue
            if not allclose(vals[on[0]], vals[on[0]] * 0 + 1):
                out.append(f"exposer for {mu} is not 1 on it")
            eps = 0 if is_exact(vals) else config.get_eps()
            if any(vals[k] >= 1 - eps for k in range(len(V)) if k != on[0]):
                out.append(f"exposer for {mu} reaches 1 on another vertex")
            if any(v < -eps for v in vals):
                out.append(f"exposer for {mu} is negative on a vertex")
    for _, m0 in scheme.decomp0:
        if any(_same(m0, m1) for _, m1 in scheme.decomp1):
            out.append("the two decompositions share a state")
    return out


def _circuits(V, sizes):
    """Minimal linearly dependent subsets (circuits) with their null vectors."""
    exact_mode = is_exact(V)
    eps = config.get_eps()
    for k in sizes:
        for idx in itertools.combinations(range(len(V)), k):
            S = V[list(idx)]
            if rank(S) != k - 1:
                continue
            N = nullspace(S.T)
            lam = N[:, 0]
            if exact_mode:
                if any(x == 0 for x in lam):
                    continue
            elif np.min(np.abs(lam)) <= eps * np.max(np.abs(lam)):
                continue
            yield list(idx), lam


def find_double_decomposition(A, minimize=True):
    """A state with two decompositions into disjoint sets of extreme points.

    Circuits of the vertex set are affine dependences; the positive and
    negative parts of a circuit's null vector give the two decompositions.
    Simplices have none.
    """
    if A.is_simplex():
        return NotFound("the state space is a simplex; every state decomposes uniquely")
    V = A.omega_vertices
    sizes = range(3, A.dim + 2)
    if not minimize:
        sizes = reversed(sizes)
    for idx, lam in _circuits(V, sizes):
        if lam[0] < 0:
            lam = -lam
        pos = [(lam[j], idx[j]) for j in range(len(idx)) if lam[j] > 0]
        neg = [(-lam[j], idx[j]) for j in range(len(idx)) if lam[j] < 0]
        s = sum(w for w, _ in pos)
        dec0 = [(w / s, V[k]) for w, k in pos]
        dec1 = [(w / s, V[k]) for w, k in neg]
        omega = sum((p * m for p, m in dec0), zeros((A.dim,), A.exact))
        ex0 = [exposing_effect(A, m) for _, m in dec0]
        ex1 = [exposing_effect(A, m) for _, m in dec1]
        scheme = CommitmentScheme(A, omega, dec0, dec1,
                                  [e.effect for e in ex0], [e.effect for e in ex1],
                                  [e.gap for e in ex0], [e.gap for e in ex1])
        bad = scheme_violations(scheme)
        if bad:
            raise AssertionError("; ".join(bad))
        return scheme
    return NotFound("no affine dependence among the extreme points")


# ---------------------------------------------------------------------------
# the protocol


@dataclass
class Transcript:
    x: list
    accept: bool
    revealed: int


def _accept_probs(scheme, b):
    """Probability that Bob's test for index i passes on the honest state mu_i."""
    probs = []
    for (_, mu), a in zip(scheme.decomp(b), scheme.exposers(b)):
        p = float(to_float(np.asarray(a) @ np.asarray(mu)))
        probs.append(1.0 if abs(p - 1.0) <= config.get_eps() else min(max(p, 0.0), 1.0))
    return np.array(probs)


def _cdf(scheme, b):
    p = np.array([float(x) for x, _ in scheme.decomp(b)])
    c = np.cumsum(p)
    c[-1] = 1.0
    return c


def run_honest(scheme, b, n, seed=None):
    """One honest commit-and-reveal of bit b on n subsystems."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    us = rng.random((1, n))
    um = rng.random((1, n))
    x, accept = _kernels.simulate_reveals(_cdf(scheme, b), _accept_probs(scheme, b), us, um)
    return Transcript([int(i) for i in x[0]], bool(accept[0]), int(b))


def simulate_honest(scheme, b, n, trials, seed=None):
    """Acceptance rate over many honest runs (one batched kernel call)."""
    rng = np.random.default_rng(seed)
    us = rng.random((trials, n))
    um = rng.random((trials, n))
    _, accept = _kernels.simulate_reveals(_cdf(scheme, b), _accept_probs(scheme, b), us, um)
    return float(np.mean(accept))


def acceptance_probability(scheme, states, b, x):
    """Exact probability that Bob accepts reveal (b, x) on the product of ``states``."""
    E = scheme.exposers(b)
    prob = None
    for s, i in zip(states, x):
        p = np.asarray(E[i]) @ np.asarray(s)
        prob = p if prob is None else prob * p
    return prob


def honest_acceptance(scheme, b, n):
    """Exact honest acceptance: sum over strings of p_x times the pass probability."""
    dec = scheme.decomp(b)
    total = None
    for x in itertools.product(range(len(dec)), repeat=n):
        w = math.prod((dec[i][0] for i in x), start=Fraction(1) if scheme.space.exact else 1.0)
        term = w * acceptance_probability(scheme, [dec[i][1] for i in x], b, x)
        total = term if total is None else total + term
    return total


@dataclass
class HidingVerdict:
    hiding: bool
    mixtures: tuple
    difference: object = None  # (index, value0, value1) of the first differing entry

    def __bool__(self):
        return self.hiding


def committed_mixture(scheme, b, n):
    """sum_x p^b_x mu^b_x1 (x) ... (x) mu^b_xn, expanded over all strings."""
    dec = scheme.decomp(b)
    one = Fraction(1) if scheme.space.exact else 1.0
    out = zeros((scheme.space.dim ** n,), scheme.space.exact)
    for x in itertools.product(range(len(dec)), repeat=n):
        w = math.prod((dec[i][0] for i in x), start=one)
        out = out + w * kron_all([dec[i][1] for i in x])
    return out


def hiding_check(scheme, n):
    """Exact equality of the two n-fold committed mixtures."""
    if n < 1:
        raise ValueError("n must be at least 1")
    m0, m1 = committed_mixture(scheme, 0, n), committed_mixture(scheme, 1, n)
    if allclose(m0, m1):
        return HidingVerdict(True, (m0, m1))
    k = next(i for i in range(len(m0)) if not allclose(m0[i], m1[i]))
    return HidingVerdict(False, (m0, m1), (k, m0[k], m1[k]))


# ---------------------------------------------------------------------------
# binding


def _reveal_values(scheme, sigma):
    """(g0, g1): Alice's best acceptance on one subsystem in state sigma for each bit."""
    return tuple(max(np.asarray(a) @ sigma for a in scheme.exposers(b)) for b in (0, 1))


def _pareto(points):
    out = []
    for p in points:
        if any(q[0] >= p[0] and q[1] >= p[1] and q != p for q in points):
            continue
        if p not in out:
            out.append(p)
    return out


@dataclass
class BindingResult:
    probability: object  # max over product strategies of P(reveal 0) + P(reveal 1) - 1
    s_star: object  # the n = 1 value
    strategy: dict  # vertex point (g0, g1) -> number of subsystems using it


def cheat_binding(scheme, n):
    """Alice's optimal product-state advantage P0 + P1 - 1 on n subsystems.

    For fixed other subsystems the objective is a nonnegative combination of
    (g0, g1) on one subsystem, and g0, g1 are convex in the state, so each
    subsystem may use an extreme point. Only the multiset of chosen points
    matters, which makes the maximization a finite exact enumeration.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    V = scheme.space.omega_vertices
    pts = _pareto([_reveal_values(scheme, v) for v in V])
    one = Fraction(1) if scheme.space.exact else 1.0
    best, arg = None, None
    for combo in itertools.combinations_with_replacement(range(len(pts)), n):
        p0 = math.prod((pts[i][0] for i in combo), start=one)
        p1 = math.prod((pts[i][1] for i in combo), start=one)
        val = p0 + p1 - 1
        if best is None or val > best:
            best, arg = val, combo
    s1 = max(g0 + g1 - 1 for g0, g1 in pts)
    strategy = {pts[i]: arg.count(i) for i in set(arg)}
    return BindingResult(best, s1, strategy)


def binding_series(scheme, ns):
    """Rows (n, probability, log2 probability) for plotting."""
    rows = []
    for n in ns:
        p = cheat_binding(scheme, n).probability
        if isinstance(p, Fraction):
            lg = math.log2(p.numerator) - math.log2(p.denominator) if p > 0 else -math.inf
        else:
            lg = math.log2(p) if p > 0 else -math.inf
        rows.append((n, p, lg))
    return rows


def maxmin_cheat_value(scheme):
    """max over sigma of min_b max_i a^b_i(sigma), by one LP per linear cell.

    This is the per-subsystem "reveal either bit" value; it is reported for
    comparison with ``cheat_binding`` (on the square it is 3/4).
    """
    A = scheme.space
    V = A.omega_vertices
    E0 = [np.asarray(a) for a in scheme.exposers0]
    E1 = [np.asarray(a) for a in scheme.exposers1]
    exact_mode = A.exact
    one = Fraction(1) if exact_mode else 1.0
    m = len(V)
    best = None
    for i0, i1, bstar in itertools.product(range(len(E0)), range(len(E1)), (0, 1)):
        # variables: convex weights over the vertices
        rows = []
        for j, a in enumerate(E0):
            if j != i0:
                rows.append(V @ (a - E0[i0]))
        for j, a in enumerate(E1):
            if j != i1:
                rows.append(V @ (a - E1[i1]))
        obj, other = (E0[i0], E1[i1]) if bstar == 0 else (E1[i1], E0[i0])
        rows.append(V @ (obj - other))
        A_ub = np.array(rows)
        b_ub = zeros((len(rows),), exact_mode)
        A_eq = np.array([[one] * m], dtype=V.dtype)
        b_eq = np.array([one], dtype=V.dtype)
        res = linprog(-(V @ obj), A_ub, b_ub, A_eq, b_eq, nonneg=True)
        if res.status == "optimal":
            val = -res.objective
            if best is None or val > best:
                best = val
    return best
