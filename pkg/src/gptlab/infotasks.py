"""Distinguishability, cloning and broadcasting, and nondisturbing maps."""

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import config
from .composite import kron, min_tensor
from .errors import ObservableMismatch, SearchBudgetExceeded
from .geometry import polyhedral_cone_rays
from .lp import check_farkas, lp_feasible
from .scalar import (
    allclose,
    all_nonneg,
    eye,
    inv,
    is_exact,
    promote,
    rank,
    solve,
    zeros,
)
from .statespace import PositiveMap, StateSpace, _cone


def _one(exact_mode):
    return Fraction(1) if exact_mode else 1.0


def _states(A, states):
    S = np.array([np.asarray(s) for s in states])
    if len(S) == 0:
        return zeros((0, A.dim), A.exact)
    S, _ = promote(S, A.unit)
    return S


# ---------------------------------------------------------------------------
# distinguishability


@dataclass
class DistinguishVerdict:
    distinguishable: bool
    effects: list = field(default_factory=list)
    certificate: object = None  # Farkas pair (lam, mu) of the LP when NO

    def __bool__(self):
        return self.distinguishable


def distinguish_system(A, states):
    """The LP behind ``jointly_distinguishable``.

    Variables are the n effects stacked (n * d, free). Equalities:
    a_i(w_j) = delta_ij and sum_i a_i = u. Inequalities: -a_i(r) <= 0 for
    every extreme ray r.
    """
    S = _states(A, states)
    n, d = len(S), A.dim
    exact_mode = is_exact(S)
    R, _ = promote(A.cone.rays, S)
    one = _one(exact_mode)
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            row = zeros((n * d,), exact_mode)
            row[i * d:(i + 1) * d] = S[j]
            rows.append(row)
            rhs.append(one if i == j else one * 0)
    unit = promote(A.unit, S)[0]
    for k in range(d):
        row = zeros((n * d,), exact_mode)
        for i in range(n):
            row[i * d + k] = one
        rows.append(row)
        rhs.append(unit[k])
    ub = []
    for i in range(n):
        for r in R:
            row = zeros((n * d,), exact_mode)
            row[i * d:(i + 1) * d] = -r
            ub.append(row)
    A_eq = np.array(rows)
    b_eq = np.array(rhs, dtype=A_eq.dtype)
    A_ub = np.array(ub)
    b_ub = zeros((len(ub),), exact_mode)
    return A_eq, b_eq, A_ub, b_ub


def jointly_distinguishable(A, states):
    """An observable (a_1..a_n) with a_i(w_j) = delta_ij, or a Farkas refutation."""
    S = _states(A, states)
    n, d = len(S), A.dim
    if n == 0:
        return DistinguishVerdict(True, [])
    A_eq, b_eq, A_ub, b_ub = distinguish_system(A, S)
    res = lp_feasible(A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub)
    if not res.feasible:
        return DistinguishVerdict(False, certificate=res.farkas)
    effects = [res.x[i * d:(i + 1) * d] for i in range(n)]
    return DistinguishVerdict(True, effects)


def check_distinguish(A, states, verdict):
    """Re-verify a distinguishability verdict by substitution."""
    S = _states(A, states)
    if verdict.distinguishable:
        E = verdict.effects
        if len(E) != len(S):
            return False
        E, S2 = promote(np.array(E), S)
        from .statespace import validate_observable

        return bool(validate_observable(A, list(E))) and allclose(E @ S2.T, eye(len(S), is_exact(E)))
    A_eq, b_eq, A_ub, b_ub = distinguish_system(A, S)
    return check_farkas(verdict.certificate, A_eq, b_eq, A_ub, b_ub)


# ---------------------------------------------------------------------------
# cloning and broadcasting


def build_cloner(A, states, obs):
    """phi(alpha) = sum_i a_i(alpha) w_i (x) w_i, a map A -> A (x)min A."""
    S = _states(A, states)
    E = np.array([np.asarray(a) for a in obs])
    E, S = promote(E, S)
    if E.shape != S.shape or not allclose(E @ S.T, eye(len(S), is_exact(E))):
        raise ObservableMismatch("observable does not distinguish the given states")
    M = sum((np.outer(kron(s, s), a) for s, a in zip(S, E)), zeros((A.dim ** 2, A.dim), is_exact(E)))
    return PositiveMap(M, A, min_tensor(A, A))


def constant_preparation(A, state):
    """phi(alpha) = u(alpha) s (x) s: broadcasts (indeed clones) the single state s."""
    s, u = promote(np.asarray(state), A.unit)
    return PositiveMap(np.outer(kron(s, s), u), A, min_tensor(A, A))


@functools.lru_cache(maxsize=64)
def _exposed_vertices(A):
    # polytopes have every extreme point exposed; confirm it for this space
    from .bitcommit import exposing_effect

    V = A.omega_vertices
    for v in V:
        exposing_effect(A, v)
    return V


def _in_hull(S, g):
    """Convex coefficients of g over the rows of S, or None."""
    S, g = promote(S, g)
    one = _one(is_exact(S))
    A_eq = np.concatenate([S.T, np.array([[one] * len(S)], dtype=S.dtype)])
    b_eq = np.concatenate([g, np.array([one], dtype=S.dtype)])
    res = lp_feasible(A_eq=A_eq, b_eq=b_eq, nonneg=True)
    return res.x if res.feasible else None


@dataclass
class BroadcastVerdict:
    broadcastable: bool
    simplex: list = field(default_factory=list)
    effects: list = field(default_factory=list)
    coefficients: list = field(default_factory=list)  # hull weights of each member of Gamma
    broadcaster: object = None
    complete: bool = True  # False when the candidate set cannot cover every clonable set
    searched: int = 0

    def __bool__(self):
        return self.broadcastable


def is_broadcastable(A, gamma, candidates=None, budget=None):
    """Search for a jointly distinguishable S with Gamma inside conv(S).

    Candidates are the extreme points of Omega_A (all exposed here) plus any
    caller-supplied states, tried in a fixed order by increasing size.
    """
    budget = config.SUBSET_BUDGET if budget is None else budget
    G = _states(A, gamma)
    if len(G) == 0:
        raise ValueError("Gamma must contain at least one state")
    if len(G) == 1:
        s = G[0]
        return BroadcastVerdict(True, [s], [A.unit], [[_one(is_exact(s))]],
                                constant_preparation(A, s))
    pool = list(_exposed_vertices(A))
    if candidates is not None:
        pool.extend(_states(A, candidates))
    P = np.array(pool)
    P, G = promote(P, G)
    # distinguishable states are linearly independent, so |S| <= dim
    top = min(A.dim, len(P))
    searched = 0
    for size in range(1, top + 1):
        if size > budget:
            raise SearchBudgetExceeded(f"subsets of size {size} exceed the budget {budget}")
        for idx in itertools.combinations(range(len(P)), size):
            S = P[list(idx)]
            searched += 1
            if rank(S) < size:
                continue
            coeffs = []
            for g in G:
                c = _in_hull(S, g)
                if c is None:
                    break
                coeffs.append(c)
            else:
                verdict = jointly_distinguishable(A, S)
                if verdict:
                    return BroadcastVerdict(True, list(S), verdict.effects, coeffs,
                                            build_cloner(A, S, verdict.effects),
                                            candidates is None, searched)
    return BroadcastVerdict(False, complete=False, searched=searched)


@dataclass
class BroadcastSet:
    vertices: object
    is_simplex: bool
    distinguishable: bool
    effects: list = field(default_factory=list)


def marginal_maps(A, phi):
    """Matrices of alpha -> marginal_A(phi(alpha)) and marginal_B(phi(alpha))."""
    M = phi.matrix if isinstance(phi, PositiveMap) else np.asarray(phi)
    d = A.dim
    M, u = promote(M, A.unit)
    MA = np.array([M[:, k].reshape(d, d) @ u for k in range(d)]).T
    MB = np.array([M[:, k].reshape(d, d).T @ u for k in range(d)]).T
    return MA, MB


def broadcast_set_of_map(A, phi):
    """All alpha in Omega_A whose two marginals under phi both equal alpha."""
    MA, MB = marginal_maps(A, phi)
    I = eye(A.dim, is_exact(MA))
    E = np.concatenate([MA - I, MB - I])
    F, E = promote(A.cone.facets, E)
    R = polyhedral_cone_rays(F, E)
    if len(R) == 0:
        return BroadcastSet(R, False, False)
    R, u = promote(R, A.unit)
    V = R / (R @ u)[:, None]
    simplex = rank(V) == len(V)
    verdict = jointly_distinguishable(A, V) if simplex else DistinguishVerdict(False)
    return BroadcastSet(V, simplex, verdict.distinguishable, verdict.effects)


# ---------------------------------------------------------------------------
# irreducible decomposition and nondisturbing maps


@dataclass
class Summand:
    basis: object  # independent rays spanning the summand's subspace
    rays: object
    indices: list  # positions of the summand's rays among the parent's rays


@dataclass
class Decomposition:
    summands: list
    projectors: list  # id_i: identity on summand i, zero on the others

    def __len__(self):
        return len(self.summands)


def _ray_blocks(R):
    """Connected components of the linear matroid on the rows of R."""
    from .scalar import independent_rows

    m = len(R)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    basis = [int(i) for i in independent_rows(R)]
    B = R[basis].T
    exact_mode = is_exact(R)
    for k in range(m):
        if k in basis:
            continue
        coef = solve(B, R[k])
        # fundamental circuit of ray k: itself plus basis rays with nonzero coefficient
        for b, c in zip(basis, coef):
            nz = c != 0 if exact_mode else abs(c) > config.get_eps()
            if nz:
                parent[find(b)] = find(k)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def irreducible_decomposition(cone):
    """The unique finest direct-sum decomposition of a pointed generating cone."""
    c = _cone(cone)
    R = c.rays
    d = c.dim
    blocks = _ray_blocks(R)
    summands, bases = [], []
    from .scalar import independent_rows

    for blk in blocks:
        sub = R[blk]
        basis = sub[[int(i) for i in independent_rows(sub)]]
        summands.append(Summand(basis, sub, list(blk)))
        bases.append(basis)
    Bfull = np.concatenate(bases).T
    Binv = inv(Bfull)
    projectors, off = [], 0
    for basis in bases:
        k = len(basis)
        mask = zeros((d, d), is_exact(R))
        for i in range(off, off + k):
            mask[i, i] = _one(is_exact(R))
        projectors.append(Bfull @ mask @ Binv)
        off += k
    return Decomposition(summands, projectors)


def nondisturbing_basis(cone):
    """The maps id_i, one per irreducible summand."""
    dec = irreducible_decomposition(cone)
    return [PositiveMap(P, cone, cone) for P in dec.projectors]


@dataclass
class NondisturbVerdict:
    nondisturbing: bool
    constants: list = field(default_factory=list)  # c_i per summand
    counterexample: object = None  # ray index
    reason: str = ""

    def __bool__(self):
        return self.nondisturbing


def ray_scale(T, r):
    """c with T r = c r, or None if r is not an eigenvector of T."""
    Tr = T @ r
    k = next(i for i in range(len(r)) if (r[i] != 0 if is_exact(r) else abs(r[i]) > config.get_eps()))
    c = Tr[k] / r[k]
    return c if allclose(Tr, c * r) else None


def is_nondisturbing(cone, T):
    """T scales every extreme ray by c >= 0, with c constant on each summand."""
    c = _cone(cone)
    M = T.matrix if isinstance(T, PositiveMap) else np.asarray(T)
    M, R = promote(M, c.rays)
    dec = irreducible_decomposition(c)
    eps = 0 if is_exact(M) else config.get_eps()
    constants = []
    for s in dec.summands:
        first = None
        for k in s.indices:
            lam = ray_scale(M, R[k])
            if lam is None:
                return NondisturbVerdict(False, counterexample=k, reason="ray is not mapped to a multiple of itself")
            if lam < -eps:
                return NondisturbVerdict(False, counterexample=k, reason="ray is mapped to a negative multiple")
            if first is None:
                first = lam
            elif abs(lam - first) > eps:
                return NondisturbVerdict(False, counterexample=k, reason="scaling differs within a summand")
        constants.append(first)
    return NondisturbVerdict(True, constants)


def check_nondisturb(cone, T, verdict):
    """Re-verify a nondisturbance verdict from its constants or counterexample."""
    c = _cone(cone)
    M = T.matrix if isinstance(T, PositiveMap) else np.asarray(T)
    M, R = promote(M, c.rays)
    dec = irreducible_decomposition(c)
    if verdict.nondisturbing:
        if len(verdict.constants) != len(dec.summands) or not all_nonneg(np.array(verdict.constants)):
            return False
        return all(allclose(M @ R[k], cst * R[k])
                   for s, cst in zip(dec.summands, verdict.constants) for k in s.indices)
    k = verdict.counterexample
    lam = ray_scale(M, R[k])
    if lam is None or not all_nonneg(np.array([lam])):
        return True
    blk = next(s for s in dec.summands if k in s.indices)
    return any(not allclose(M @ R[j], lam * R[j]) for j in blk.indices)


def in_nondisturbing_span(cone, T):
    """Coefficients c >= 0 with T = sum_i c_i id_i, or None."""
    basis = nondisturbing_basis(cone)
    M = T.matrix if isinstance(T, PositiveMap) else np.asarray(T)
    cols = np.array([P.matrix.reshape(-1) for P in basis]).T
    cols, v = promote(cols, M.reshape(-1))
    coef = solve(cols, v)
    if coef is None or not allclose(cols @ coef, v) or not all_nonneg(coef):
        return None
    return coef


def space_of_cone(cone, label="cone"):
    """A state space on a bare cone, unit = sum of the dual rays."""
    c = _cone(cone)
    return StateSpace(c, c.facets.sum(axis=0), label)
