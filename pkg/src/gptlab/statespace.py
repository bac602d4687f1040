"""Abstract state spaces (cone + order unit), effects, observables, maps."""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import config
from .errors import DimensionMismatch, NotGenerating, SearchBudgetExceeded
from .geometry import Cone, dual_cone, lp_feasible
from .lp import linprog
from .scalar import (
    allclose,
    all_nonneg,
    exact,
    eye,
    inv,
    is_exact,
    nullspace,
    promote,
    rank,
    to_float,
    zeros,
)


class StateSpace:
    """An ordered vector space with generating cone and order unit."""

    def __init__(self, cone, unit, label="", check=True):
        unit = np.asarray(unit)
        if unit.shape != (cone.dim,):
            raise DimensionMismatch("order unit does not match the cone dimension")
        if cone.exact and not is_exact(unit):
            cone = cone.to_float()
        elif not cone.exact and is_exact(unit):
            unit = to_float(unit)
        self.cone = cone
        self.unit = unit
        self.label = label
        if not check:
            return
        vals = cone.rays @ unit
        if not all(v > (0 if self.exact else config.get_eps()) for v in vals):
            raise ValueError("order unit must be strictly positive on the cone")

    @property
    def dim(self):
        return self.cone.dim

    @property
    def exact(self):
        return is_exact(self.unit)

    @cached_property
    def omega_vertices(self):
        R = self.cone.rays
        return R / (R @ self.unit)[:, None]

    @property
    def center(self):
        V = self.omega_vertices
        return V.sum(axis=0) / len(V)

    def u(self, v):
        return np.asarray(v) @ self.unit

    def is_simplex(self):
        return len(self.cone.rays) == self.dim

    def to_float(self):
        return StateSpace(self.cone.to_float(), to_float(self.unit), self.label)

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"StateSpace({self.label!r}, dim={self.dim}, vertices={len(self.cone.rays)}, {mode})"


def space_from_rays(rays, unit, label="custom"):
    return StateSpace(Cone.from_rays(rays), unit, label)


def make_classical(n):
    """Probability simplex on n outcomes (positive orthant, unit = sum)."""
    if n < 1:
        raise ValueError("classical(n) needs n >= 1")
    I = eye(n, True)
    return StateSpace(Cone(rays=I, facets=I), exact([1] * n), f"classical({n})")


# vertex frames for the regular polygons that admit rational coordinates;
# each is a linear image of the Euclidean polygon, listed counterclockwise
_EXACT_FRAMES = {
    3: [(1, 0), (-1, 1), (0, -1)],
    4: [(1, 1), (-1, 1), (-1, -1), (1, -1)],
    6: [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)],
}


def make_polygon(n):
    """Cone over a regular n-gon at height 1; exact for n in {3, 4, 6}."""
    if n < 3:
        raise ValueError("polygon(n) needs n >= 3")
    if n in _EXACT_FRAMES:
        verts = exact([[x, y, 1] for x, y in _EXACT_FRAMES[n]])
        unit = exact([0, 0, 1])
    else:
        verts = np.array([[math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n), 1.0]
                          for k in range(n)])
        unit = np.array([0.0, 0.0, 1.0])
    cone = Cone.from_rays(verts)
    # keep the counterclockwise vertex order
    return StateSpace(cone, unit, "square" if n == 4 else f"polygon({n})")


def dual_space(A, unit=None):
    """A* as a state space; default unit is the barycenter of Omega_A."""
    if unit is None:
        unit = A.center
    return StateSpace(dual_cone(A.cone), unit, f"dual({A.label})")


def base_norm(A, v):
    """min u(x) + u(y) over decompositions v = x - y with x, y in A_+."""
    v = np.asarray(v)
    if v.shape != (A.dim,):
        raise DimensionMismatch("vector does not match the state space")
    R, v = promote(A.cone.rays, v)
    uvals = R @ (A.unit if is_exact(R) else to_float(A.unit))
    c = np.concatenate([uvals, uvals])
    res = linprog(c, A_eq=np.concatenate([R.T, -R.T], axis=1), b_eq=v, nonneg=True)
    return res.objective


# ---------------------------------------------------------------------------
# effects and observables


def effect_values(A, a):
    return A.omega_vertices @ np.asarray(a)


def is_effect(A, a):
    a = np.asarray(a)
    if a.shape != (A.dim,):
        raise DimensionMismatch("effect does not match the state space")
    vals = effect_values(A, a)
    return all_nonneg(vals) and all_nonneg(1 - vals)


@dataclass
class ObservableCheck:
    valid: bool
    residual: object
    bad_effects: list = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate_observable(A, effects):
    effects = [np.asarray(a) for a in effects]
    bad = [i for i, a in enumerate(effects) if not is_effect(A, a)]
    total = sum(effects[1:], effects[0]) if effects else zeros((A.dim,), A.exact)
    residual = A.unit - total
    ok = not bad and bool(effects) and allclose(total, A.unit)
    return ObservableCheck(ok, residual, bad)


# ---------------------------------------------------------------------------
# maps


class PositiveMap:
    """Matrix of a linear map source -> target (column-vector convention)."""

    def __init__(self, matrix, source=None, target=None):
        self.matrix = np.asarray(matrix)
        self.source = source
        self.target = target

    def __call__(self, v):
        return self.matrix @ np.asarray(v)

    def compose(self, other):
        """self after other."""
        return PositiveMap(self.matrix @ other.matrix, other.source, self.target)

    def __repr__(self):
        return f"PositiveMap({self.matrix.shape[1]} -> {self.matrix.shape[0]})"


def _cone(X):
    # StateSpace and CompositeSpace both carry a cone
    return getattr(X, "cone", X)


def is_positive_map(T, A, B):
    M = T.matrix if isinstance(T, PositiveMap) else np.asarray(T)
    ca, cb = _cone(A), _cone(B)
    if M.shape != (cb.dim, ca.dim):
        raise DimensionMismatch("map shape does not match the spaces")
    return all_nonneg(cb.facets @ M @ ca.rays.T)


def is_norm_contractive(T, A, B):
    M = T.matrix if isinstance(T, PositiveMap) else np.asarray(T)
    vals = A.omega_vertices @ M.T @ B.unit
    return all_nonneg(1 - vals)


def _incidence(cone):
    R, F = cone.rays, cone.facets
    s = R @ F.T
    if is_exact(s):
        return s == 0
    return np.abs(to_float(s)) <= config.get_eps()


def _adjacency(cone):
    inc = _incidence(cone)
    d = cone.dim
    m = len(inc)
    adj = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for j in range(i + 1, m):
            common = inc[i] & inc[j]
            if rank(cone.facets[common]) == d - 2 if d > 2 else True:
                adj[i, j] = adj[j, i] = True
    return adj


def _map_from_bijection(RA, RB, perm, basis):
    """Positive scalings lam with T r_i = lam_i s_perm(i); None if impossible."""
    d = RA.shape[1]
    exact_mode = is_exact(RA)
    m = len(RA)
    Binv = inv(RA[basis].T)  # coordinates of rays in the basis
    rows = []
    for k in range(m):
        if k in basis:
            continue
        coeff = Binv @ RA[k]
        # sum_j coeff_j lam_j s_perm(basis_j) - lam_k s_perm(k) = 0
        block = zeros((d, m), exact_mode)
        for j, b in enumerate(basis):
            block[:, b] = coeff[j] * RB[perm[b]]
        block[:, k] = -RB[perm[k]]
        rows.append(block)
    if rows:
        M = np.concatenate(rows, axis=0)
        N = nullspace(M)
    else:
        N = eye(m, exact_mode)
    if N.shape[1] == 0:
        return None
    if N.shape[1] == 1:
        lam = N[:, 0]
        if all(x < 0 for x in lam):
            lam = -lam
        if not all(x > (0 if exact_mode else config.get_eps()) for x in lam):
            return None
    else:
        one = Fraction(1) if exact_mode else 1.0
        # lam = N t with lam >= 1
        res = lp_feasible(A_ub=-N, b_ub=np.array([-one] * m, dtype=N.dtype))
        if not res.feasible:
            return None
        lam = N @ res.x
    S = np.array([lam[b] * RB[perm[b]] for b in basis]).T
    return S @ inv(RA[basis].T)


def _ray_bijections(ca, cb, budget):
    """Bijections of extreme rays that preserve the adjacency graph."""
    RA, RB = ca.rays, cb.rays
    if len(RA) != len(RB):
        return
    if len(RA) > budget:
        raise SearchBudgetExceeded(f"{len(RA)} rays exceed the isomorphism budget {budget}")
    m = len(RA)
    adjA, adjB = _adjacency(ca), _adjacency(cb)
    degA, degB = adjA.sum(axis=1), adjB.sum(axis=1)
    perm = [-1] * m
    used = [False] * m

    def extend(i):
        if i == m:
            yield list(perm)
            return
        for j in range(m):
            if used[j] or degA[i] != degB[j]:
                continue
            if any(adjA[i, k] != adjB[j, perm[k]] for k in range(i)):
                continue
            perm[i], used[j] = j, True
            yield from extend(i + 1)
            perm[i], used[j] = -1, False

    yield from extend(0)


def order_isomorphisms(A, B, budget=None):
    """Yield linear maps carrying A_+ onto B_+ (ray bijections extended linearly)."""
    ca, cb = _cone(A), _cone(B)
    budget = config.ISO_RAY_BUDGET if budget is None else budget
    if ca.dim != cb.dim:
        return
    RA, RB = promote(ca.rays, cb.rays)
    basis = [int(i) for i in _basis_indices(RA)]
    for p in _ray_bijections(ca, cb, budget):
        T = _map_from_bijection(RA, RB, p, basis)
        if T is None:
            continue
        if is_positive_map(T, ca, cb) and is_positive_map(inv(T), cb, ca):
            yield PositiveMap(T, A, B)


def symmetries(A, budget=None):
    """Linear maps permuting the vertices of Omega_A (unital order automorphisms)."""
    budget = config.ISO_RAY_BUDGET if budget is None else budget
    out = []
    for p in _ray_bijections(A.cone, A.cone, budget):
        T = vertex_permutation_map(A, p)
        if T is not None:
            out.append(T)
    return out


def _basis_indices(R):
    from .scalar import independent_rows

    return independent_rows(R)


def find_order_isomorphism(A, B, budget=None):
    """An invertible positive map with positive inverse, or None."""
    return next(order_isomorphisms(A, B, budget), None)


@dataclass
class SelfDualityVerdict:
    weakly_self_dual: bool
    isomorphism: object = None
    dual: object = None

    def __bool__(self):
        return self.weakly_self_dual


def is_weakly_self_dual(A, unit=None, budget=None):
    D = dual_space(A, unit)
    iso = find_order_isomorphism(A, D, budget)
    return SelfDualityVerdict(iso is not None, iso, D)


def make_irregular_hexagon():
    """A hexagon whose cone is not order-isomorphic to its dual."""
    verts = exact([[0, 0, 1], [4, 0, 1], [6, 1, 1], [5, 4, 1], [1, 5, 1], [-1, 2, 1]])
    return space_from_rays(verts, exact([0, 0, 1]), "irregular-hexagon")


def check_space(A):
    """Raise if the space violates its invariants (generating, pointed, unit > 0)."""
    if rank(A.cone.rays) < A.dim:
        raise NotGenerating("rays do not span the space")
    A.cone.facets  # noqa: B018 - raises NotPointed
    return True


def vertex_permutation_map(A, perm):
    """Linear map sending omega vertex k to vertex perm[k], if one exists."""
    V = A.omega_vertices
    basis = _basis_indices(V)
    T = np.array([V[perm[b]] for b in basis]).T @ inv(V[basis].T)
    if not allclose(V @ T.T, V[list(perm)]):
        return None
    return T


def polygon_group(A, kind="cyclic"):
    """Symmetry group of a polygon space from vertex permutations.

    ``kind`` is "cyclic" (rotations) or "dihedral" (rotations and reflections).
    Elements are returned as matrices, identity first.
    """
    n = len(A.omega_vertices)
    gens = [vertex_permutation_map(A, [(k + 1) % n for k in range(n)])]
    if kind == "dihedral":
        gens.append(vertex_permutation_map(A, [(-k) % n for k in range(n)]))
    elif kind != "cyclic":
        raise ValueError(f"unknown group kind {kind!r}")
    if any(g is None for g in gens):
        raise ValueError("vertex permutation is not induced by a linear map")
    return generate_group(gens, A.exact)


def generate_group(gens, exact_mode=True):
    d = gens[0].shape[0]
    elems = [eye(d, exact_mode)]
    frontier = list(elems)
    while frontier:
        new = []
        for g in frontier:
            for h in gens:
                k = h @ g
                if not any(allclose(k, e) for e in elems):
                    elems.append(k)
                    new.append(k)
        frontier = new
        if len(elems) > 10_000:
            raise ValueError("generated group is too large")
    return elems


def classical_orthant_permutations(n):
    """All permutation matrices of classical(n) (its full symmetry group)."""
    out = []
    for p in itertools.permutations(range(n)):
        M = zeros((n, n), True)
        for i, j in enumerate(p):
            M[j, i] = Fraction(1)
        out.append(M)
    return out
