"""Bipartite composites: min/max tensor products, conditioning, separability.

A vector of A (x) B is stored flattened from the dA x dB matrix W, and is read
as the bilinear form w(a, b) = a^T W b on A* x B*. The product state
alpha (x) beta is W = outer(alpha, beta).
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import DimensionMismatch
from .geometry import Cone, cone_contains, lp_feasible
from .scalar import all_nonneg, allclose, is_exact, promote, to_float, zeros
from .statespace import PositiveMap, StateSpace, dual_space


def kron(a, b):
    a, b = promote(a, b)
    return np.outer(a, b).reshape(-1)


def kron_all(vectors):
    out = vectors[0]
    for v in vectors[1:]:
        out = kron(out, v)
    return out


class CompositeSpace:
    """A state space on the tensor product of its factors."""

    def __init__(self, space, factors, kind, parts=None):
        self.space = space
        self.factors = tuple(factors)
        self.kind = kind
        if parts is None:
            parts = []
            for f in self.factors:
                parts.extend(f.parts if isinstance(f, CompositeSpace) else [f])
        self.parts = tuple(parts)

    @property
    def cone(self):
        return self.space.cone

    @property
    def unit(self):
        return self.space.unit

    @property
    def dim(self):
        return self.space.dim

    @property
    def exact(self):
        return self.space.exact

    @property
    def omega_vertices(self):
        return self.space.omega_vertices

    @property
    def label(self):
        return self.space.label

    def __repr__(self):
        return f"CompositeSpace({self.space.label!r}, kind={self.kind})"


def _space(X):
    return X.space if isinstance(X, CompositeSpace) else X


def _unify(A, B):
    A, B = _space(A), _space(B)
    if A.exact != B.exact:
        A, B = (A.to_float() if A.exact else A), (B.to_float() if B.exact else B)
    return A, B


def product_rays(A, B):
    A, B = _unify(A, B)
    return np.array([kron(r, s) for r in A.cone.rays for s in B.cone.rays])


def min_tensor(A, B):
    """Cone generated by product states."""
    SA, SB = _unify(A, B)
    cone = Cone(rays=product_rays(SA, SB))
    space = StateSpace(cone, kron(SA.unit, SB.unit), f"({SA.label} (x)min {SB.label})")
    return CompositeSpace(space, (A, B), "min")


def max_tensor(A, B):
    """Cone of forms nonnegative on all products of effects."""
    SA, SB = _unify(A, B)
    facets = np.array([kron(f, g) for f in SA.cone.facets for g in SB.cone.facets])
    cone = Cone(facets=facets)
    # u_A (x) u_B is strictly positive on every nonzero positive form, so the
    # unit check (which would force ray enumeration) is skipped
    space = StateSpace(cone, kron(SA.unit, SB.unit), f"({SA.label} (x)max {SB.label})", check=False)
    return CompositeSpace(space, (A, B), "max")


def min_max_composite(A, B, C):
    """The tripartite A (x)min (B (x)max C) used for conclusive teleportation."""
    return min_tensor(A, max_tensor(B, C))


# ---------------------------------------------------------------------------
# bipartite states


class BipartiteState:
    """Bilinear form on A* x B* stored as a dA x dB matrix."""

    def __init__(self, matrix, A, B):
        self.matrix = np.asarray(matrix)
        A, B = _space(A), _space(B)
        if self.matrix.shape != (A.dim, B.dim):
            raise DimensionMismatch("state matrix does not match the factors")
        self.A, self.B = A, B

    @classmethod
    def from_vector(cls, v, A, B):
        A, B = _space(A), _space(B)
        return cls(np.asarray(v).reshape(A.dim, B.dim), A, B)

    @classmethod
    def product(cls, alpha, beta, A, B):
        alpha, beta = promote(alpha, beta)
        return cls(np.outer(alpha, beta), A, B)

    @property
    def vector(self):
        return self.matrix.reshape(-1)

    def __call__(self, a, b):
        return np.asarray(a) @ self.matrix @ np.asarray(b)

    def normalization(self):
        return self(self.A.unit, self.B.unit)

    def is_positive_on_products(self):
        return all_nonneg(self.A.cone.facets @ self.matrix @ self.B.cone.facets.T)

    def __repr__(self):
        return f"BipartiteState({self.A.label} x {self.B.label})"


def marginal(w, side="A"):
    """omega(-, u_B) for side A, omega(u_A, -) for side B."""
    if side == "A":
        return w.matrix @ w.B.unit
    if side == "B":
        return w.matrix.T @ w.A.unit
    raise ValueError("side must be 'A' or 'B'")


def conditional(w, a, side="A"):
    """Condition on effect a of the given side; returns (state, probability).

    The returned state lives on the other factor and is normalized; when the
    probability is zero the zero vector is returned.
    """
    a = np.asarray(a)
    if side == "A":
        un = w.matrix.T @ a
        other = w.B
    elif side == "B":
        un = w.matrix @ a
        other = w.A
    else:
        raise ValueError("side must be 'A' or 'B'")
    p = un @ other.unit
    if (p == 0) if is_exact(un) else abs(p) <= config.get_eps():
        return zeros(un.shape, is_exact(un)), p * 0
    return un / p, p


def omega_hat(w):
    """The map A* -> B, a |-> omega(a, -): the un-normalized conditional."""
    return PositiveMap(w.matrix.T, dual_space(w.A), w.B)


def f_hat(F, A, B):
    """For an effect f on A (x) B (matrix F), the map A -> B*, alpha |-> f(alpha, -)."""
    F = np.asarray(F)
    A, B = _space(A), _space(B)
    return PositiveMap(F.T, A, dual_space(B))


def state_from_map(M, A, B):
    """Inverse of omega_hat: the form whose hat map is M : A* -> B."""
    return BipartiteState(np.asarray(M).T, A, B)


# ---------------------------------------------------------------------------
# separability and composites


@dataclass
class SeparabilityVerdict:
    separable: bool
    decomposition: list = field(default_factory=list)  # (weight, i, j) over normalized vertices
    witness: object = None  # functional on A (x) B

    def __bool__(self):
        return self.separable


def is_separable(C, w):
    """LP over product rays: convex decomposition or entanglement witness."""
    A, B = C.factors if isinstance(C, CompositeSpace) else C
    A, B = _unify(A, B)
    v = w.vector if isinstance(w, BipartiteState) else np.asarray(w)
    P, v = promote(product_rays(A, B), v)
    res = lp_feasible(A_eq=P.T, b_eq=v, nonneg=True)
    if not res.feasible:
        return SeparabilityVerdict(False, witness=res.farkas[1])
    uA, uB = A.cone.rays @ A.unit, B.cone.rays @ B.unit
    nb = len(B.cone.rays)
    dec = []
    for k, lam in enumerate(res.x):
        if (lam != 0) if is_exact(res.x) else abs(lam) > config.get_eps():
            i, j = divmod(k, nb)
            dec.append((lam * uA[i] * uB[j], i, j))
    return SeparabilityVerdict(True, decomposition=dec)


def check_separability(C, w, verdict):
    """Re-verify a separability verdict by substitution."""
    A, B = C.factors if isinstance(C, CompositeSpace) else C
    A, B = _unify(A, B)
    v = w.vector if isinstance(w, BipartiteState) else np.asarray(w)
    VA, VB = A.omega_vertices, B.omega_vertices
    if verdict.separable:
        total = sum((lam * kron(VA[i], VB[j]) for lam, i, j in verdict.decomposition),
                    zeros(v.shape, is_exact(v)))
        ok_w = all_nonneg(np.array([lam for lam, _, _ in verdict.decomposition]))
        return ok_w and allclose(total, v)
    f = np.asarray(verdict.witness)
    P, f2 = promote(product_rays(A, B), f)
    _, v2 = promote(f2, v)
    neg = f2 @ v2 < (0 if is_exact(f2) and is_exact(v2) else -config.get_eps())
    return all_nonneg(P @ f2) and bool(neg)


def entangled_rays(C):
    """Extreme rays of a composite cone that are not separable, with witnesses."""
    out = []
    for k, r in enumerate(C.cone.rays):
        verdict = is_separable(C, r / (r @ C.unit))
        if not verdict.separable:
            out.append((k, verdict))
    return out


def is_composite(K, A, B):
    """min(A, B) <= K <= max(A, B), with K a Cone on the tensor space."""
    A, B = _unify(A, B)
    cone = K.cone if isinstance(K, (CompositeSpace, StateSpace)) else K
    if cone.dim != A.dim * B.dim:
        return False
    for p in product_rays(A, B):
        if not cone_contains(cone, p):
            return False
    maxf = np.array([kron(f, g) for f in A.cone.facets for g in B.cone.facets])
    R, M = promote(cone.rays, maxf)
    return all_nonneg(R @ M.T)


def _contract(vec, dims, keep, effects):
    """Contract a multipartite tensor with effect vectors on the parts not kept."""
    T = np.asarray(vec).reshape(dims)
    # contract from the last axis so earlier axis numbers stay valid
    for axis in sorted(effects, reverse=True):
        T = np.tensordot(T, effects[axis], axes=([axis], [0]))
    return T.reshape(-1)


def conditional_state_space(C, J):
    """Cone generated by conditioning composite rays on product effects outside J."""
    parts = C.parts
    J = sorted(set(J))
    if not J or any(j < 0 or j >= len(parts) for j in J):
        raise ValueError("J must be a nonempty set of part indices")
    dims = [p.dim for p in parts]
    outside = [i for i in range(len(parts)) if i not in J]
    choices = [parts[i].cone.facets for i in outside]
    vecs = []
    exact_mode = C.exact
    for r in C.cone.rays:
        for combo in itertools.product(*choices):
            effs = {i: e for i, e in zip(outside, combo)}
            v = _contract(r, dims, J, effs)
            nz = any(x != 0 for x in v) if exact_mode else np.linalg.norm(to_float(v)) > config.get_eps()
            if nz:
                vecs.append(v)
    unit = parts[J[0]].unit
    for j in J[1:]:
        unit = kron(unit, parts[j].unit)
    label = "cond[" + ",".join(parts[j].label for j in J) + "]"
    return StateSpace(Cone.from_rays(np.array(vecs)), unit, label)


def same_cone(K1, K2):
    """Two cones coincide: each one's rays satisfy the other's facets."""
    R1, F2 = promote(K1.rays, K2.facets)
    R2, F1 = promote(K2.rays, K1.facets)
    return all_nonneg(R1 @ F2.T) and all_nonneg(R2 @ F1.T)
