"""Polyhedral cones: double description, duality, membership, LP feasibility."""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import _kernels, config
from .errors import Degenerate, DimensionMismatch, NotGenerating, NotPointed
from .lp import check_feasible_point, linprog, lp_feasible  # noqa: F401
from .scalar import (
    exact,
    independent_rows,
    int_dot,
    inv,
    is_exact,
    nullspace,
    primitive,
    promote,
    rank,
    to_float,
    zeros,
)

__all__ = [
    "Cone",
    "Membership",
    "canonical_ray",
    "cone_contains",
    "direct_sum",
    "dual_cone",
    "extreme_rays",
    "lp_feasible",
    "orthant",
    "polyhedral_cone_rays",
    "same_ray_set",
]


def canonical_ray(v):
    """Exact: coprime integers (as Fractions). Floating: unit Euclidean norm."""
    v = np.asarray(v)
    if is_exact(v):
        return exact(primitive(v))
    return v / np.linalg.norm(v)


def _ray_key(v):
    return tuple(int(x) for x in primitive(v))


def _dedupe(rows):
    rows = np.asarray(rows)
    if len(rows) == 0:
        return rows
    if is_exact(rows):
        seen, keep = set(), []
        for i, r in enumerate(rows):
            k = _ray_key(r)
            if k not in seen:
                seen.add(k)
                keep.append(i)
        return rows[keep]
    keep = []
    for i, r in enumerate(rows):
        if not any(np.linalg.norm(r - rows[j]) <= 10 * config.get_eps() for j in keep):
            keep.append(i)
    return rows[keep]


# ---------------------------------------------------------------------------
# double description


def _double_description(F, d):
    """Extreme rays of {x : F x >= 0} for a pointed, full-dimensional cone."""
    F = np.asarray(F)
    exact_mode = is_exact(F)
    if F.shape[0] == 0 or rank(F) < d:
        raise Degenerate("constraints do not define a pointed cone")
    if exact_mode:
        F = np.array([primitive(f) for f in F], dtype=object)
    else:
        F = F / np.linalg.norm(F, axis=1)[:, None]
    eps = config.get_eps()

    basis = independent_rows(F)
    B = exact(F[basis]) if exact_mode else F[basis]
    R = inv(B).T
    if exact_mode:
        R = np.array([primitive(r) for r in R], dtype=object)
    else:
        R = R / np.linalg.norm(R, axis=1)[:, None]
    inc = ~np.eye(d, dtype=bool)
    order = basis + [i for i in range(F.shape[0]) if i not in set(basis)]
    for c in order[d:]:
        f = F[c]
        if exact_mode:
            s = int_dot(R, f)
            sgn = np.array([(x > 0) - (x < 0) for x in s], dtype=np.int64)
        else:
            s = R @ f
            sgn = np.where(s > eps, 1, np.where(s < -eps, -1, 0))
        pos = np.nonzero(sgn > 0)[0]
        neg = np.nonzero(sgn < 0)[0]
        zero = np.nonzero(sgn == 0)[0]
        if len(neg) == 0:
            inc = np.concatenate([inc, (sgn == 0)[:, None]], axis=1)
            continue
        pairs = _kernels.adjacent_pairs(inc, pos, neg, d - 2)
        new_rays, new_inc = [], []
        for p, q in pairs:
            if exact_mode:
                r = primitive(s[p] * R[q] - s[q] * R[p])
            else:
                r = s[p] * R[q] - s[q] * R[p]
                r = r / np.linalg.norm(r)
            new_rays.append(r)
            new_inc.append(np.append(inc[p] & inc[q], True))
        keep = np.concatenate([pos, zero])
        old_inc = np.concatenate([inc[keep], (sgn[keep] == 0)[:, None]], axis=1)
        if new_rays:
            R = np.concatenate([R[keep], np.array(new_rays, dtype=R.dtype)], axis=0)
            inc = np.concatenate([old_inc, np.array(new_inc, dtype=bool)], axis=0)
        else:
            R = R[keep]
            inc = old_inc
        if len(R) == 0:
            raise Degenerate("constraints cut the cone down to {0}")
    if rank(R) < d:
        raise Degenerate("constraints do not define a full-dimensional cone")
    if exact_mode:
        return exact(R)
    return _dedupe(R)


def extreme_rays(facets, dim=None):
    """One generator per extreme ray of {x : f(x) >= 0 for every facet f}."""
    F = np.asarray(facets)
    if dim is None:
        dim = F.shape[1]
    if F.ndim != 2 or F.shape[1] != dim:
        raise DimensionMismatch("facet vectors do not match the dimension")
    return _double_description(F, dim)


def _tight(M, v):
    s = M @ v
    if is_exact(s):
        return s == 0
    return np.abs(to_float(s)) <= config.get_eps()


class Cone:
    """A pointed generating polyhedral cone with both representations.

    Either representation may be supplied; the other is computed on demand by
    double description. ``Cone.from_rays`` / ``Cone.from_facets`` validate
    and drop redundant generators.
    """

    def __init__(self, rays=None, facets=None):
        if rays is None and facets is None:
            raise ValueError("a cone needs rays or facets")
        if rays is not None:
            self.__dict__["rays"] = np.array([canonical_ray(r) for r in np.asarray(rays)])
        if facets is not None:
            self.__dict__["facets"] = np.array([canonical_ray(f) for f in np.asarray(facets)])
        ref = rays if rays is not None else facets
        self.dim = np.asarray(ref).shape[1]

    @cached_property
    def rays(self):
        try:
            return extreme_rays(self.facets, self.dim)
        except Degenerate as exc:
            raise NotGenerating(str(exc)) from exc

    @cached_property
    def facets(self):
        try:
            return extreme_rays(self.rays, self.dim)
        except Degenerate as exc:
            raise NotPointed(str(exc)) from exc

    @property
    def exact(self):
        return is_exact(self.__dict__.get("rays", self.__dict__.get("facets")))

    @classmethod
    def from_rays(cls, rays):
        R = _dedupe(np.array([canonical_ray(r) for r in np.asarray(rays)]))
        d = R.shape[1]
        if rank(R) < d:
            raise NotGenerating("rays do not span the space")
        cone = cls(rays=R)
        F = cone.facets
        keep = [i for i, r in enumerate(R) if rank(F[_tight(F, r)]) == d - 1] if d > 1 else [0]
        out = cls(rays=R[keep], facets=F)
        return out

    @classmethod
    def from_facets(cls, facets):
        F = _dedupe(np.array([canonical_ray(f) for f in np.asarray(facets)]))
        d = F.shape[1]
        if rank(F) < d:
            raise NotPointed("facets do not define a pointed cone")
        cone = cls(facets=F)
        R = cone.rays
        keep = [i for i, f in enumerate(F) if rank(R[_tight(R, f)]) == d - 1] if d > 1 else [0]
        return cls(rays=R, facets=F[keep])

    def contains(self, v):
        """Facet test (no certificate); see ``cone_contains`` for certificates."""
        s = self.facets @ np.asarray(v)
        if is_exact(s):
            return bool(np.all(s >= 0))
        return bool(np.all(to_float(s) >= -config.get_eps()))

    def to_float(self):
        return Cone(rays=to_float(self.rays), facets=to_float(self.facets))

    def __repr__(self):
        return f"Cone(dim={self.dim}, rays={len(self.rays)})"


def dual_cone(c):
    """The cone of functionals nonnegative on ``c``."""
    if rank(c.rays) < c.dim:
        raise NotGenerating("cone is not generating")
    F = c.facets
    if rank(F) < c.dim:
        raise NotPointed("cone is not pointed")
    return Cone(rays=F, facets=c.rays)


def same_ray_set(a, b):
    """Equality of extreme-ray sets up to positive scaling."""
    A = np.asarray(a.rays if isinstance(a, Cone) else a)
    B = np.asarray(b.rays if isinstance(b, Cone) else b)
    if len(A) != len(B):
        return False
    A, B = promote(A, B)
    if is_exact(A):
        return {_ray_key(r) for r in A} == {_ray_key(r) for r in B}
    A = A / np.linalg.norm(A, axis=1)[:, None]
    B = B / np.linalg.norm(B, axis=1)[:, None]
    used = set()
    for r in A:
        d = np.linalg.norm(B - r, axis=1)
        j = int(np.argmin(d))
        if d[j] > 1e3 * config.get_eps() or j in used:
            return False
        used.add(j)
    return True


@dataclass
class Membership:
    contained: bool
    coefficients: object = None  # over c.rays, when contained
    witness: object = None  # separating functional, when not

    def __bool__(self):
        return self.contained


def cone_contains(c, v):
    """Decide v in c with a certificate from the simplex method."""
    v = np.asarray(v)
    if v.shape != (c.dim,):
        raise DimensionMismatch(f"vector of length {v.shape} against cone of dim {c.dim}")
    R, v = promote(c.rays, v)
    res = lp_feasible(A_eq=R.T, b_eq=v, nonneg=True)
    if res.feasible:
        return Membership(True, coefficients=res.x)
    return Membership(False, witness=res.farkas[1])


def verify_membership(c, v, m):
    R, v = promote(c.rays, np.asarray(v))
    if m.contained:
        return check_feasible_point(m.coefficients, A_eq=R.T, b_eq=v, nonneg=True)
    f = np.asarray(m.witness)
    e = 0 if is_exact(f) and is_exact(R) else config.get_eps()
    return bool(all(x >= -e for x in R @ f) and f @ v < -e)


# ---------------------------------------------------------------------------
# constructions


def orthant(n, exact_mode=True):
    from .scalar import eye

    I = eye(n, exact_mode)
    return Cone(rays=I, facets=I)


def direct_sum(*cones):
    """Block direct sum of cones living in complementary coordinates."""
    exact_mode = all(c.exact for c in cones)
    dim = sum(c.dim for c in cones)
    rays, facets, off = [], [], 0
    for c in cones:
        for r in c.rays:
            v = zeros((dim,), exact_mode)
            v[off:off + c.dim] = r
            rays.append(v)
        for f in c.facets:
            v = zeros((dim,), exact_mode)
            v[off:off + c.dim] = f
            facets.append(v)
        off += c.dim
    return Cone(rays=np.array(rays), facets=np.array(facets))


def implicit_equalities(H):
    """Rows i with h_i(x) = 0 on all of {x : H x >= 0}."""
    H = np.asarray(H)
    k, p = H.shape
    exact_mode = is_exact(H)
    one = Fraction(1) if exact_mode else 1.0
    # variables (t free, s >= 0): maximize sum s, H t >= s, s <= 1
    A_ub = np.concatenate([
        np.concatenate([-H, _eye(k, exact_mode)], axis=1),
        np.concatenate([zeros((k, p), exact_mode), _eye(k, exact_mode)], axis=1),
    ])
    b_ub = np.concatenate([zeros((k,), exact_mode), np.array([one] * k, dtype=H.dtype)])
    c = np.concatenate([zeros((p,), exact_mode), np.array([-one] * k, dtype=H.dtype)])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, nonneg=[False] * p + [True] * k)
    s = res.x[p:]
    if exact_mode:
        return [i for i in range(k) if s[i] == 0]
    return [i for i in range(k) if s[i] <= config.get_eps()]


def _eye(n, exact_mode):
    from .scalar import eye

    return eye(n, exact_mode)


def polyhedral_cone_rays(G, E=None):
    """Extreme rays of the pointed cone {x : G x >= 0, E x = 0}.

    Unlike ``extreme_rays`` the cone may be lower dimensional; implicit
    equalities are found by one LP and factored out before double description.
    Returns an empty array when the cone is {0}.
    """
    G = np.asarray(G)
    d = G.shape[1]
    exact_mode = is_exact(G)
    N = nullspace(E) if E is not None and np.asarray(E).size else _eye(d, exact_mode)
    if N.shape[1] == 0:
        return zeros((0, d), exact_mode)
    H = G @ N
    if rank(H) < N.shape[1]:
        raise NotPointed("cone contains a line")
    imp = implicit_equalities(H)
    if imp:
        N2 = nullspace(H[imp])
        if N2.shape[1] == 0:
            return zeros((0, d), exact_mode)
        N = N @ N2
        rest = [i for i in range(H.shape[0]) if i not in set(imp)]
        H = H[rest] @ N2
    q = N.shape[1]
    if q == 1:
        w = np.array([Fraction(1) if exact_mode else 1.0], dtype=H.dtype)
        if len(H) and (H @ w)[0] < 0:
            w = -w
        W = w[None, :]
    else:
        W = _double_description(H, q)
    return np.array([canonical_ray(N @ w) for w in W])
