"""Conclusive and deterministic teleportation.

Conventions. For an effect f on A (x) B with matrix F (dA x dB),
f(alpha (x) beta) = alpha^T F beta and f_hat = F^T : A -> B*. For a state
omega on B (x) C with matrix W (dB x dC), omega_hat = W^T : B* -> C. Feeding
alpha into A (x) omega and post-selecting on f leaves the unnormalized state
mu(alpha) on C, where mu = omega_hat o f_hat = W^T F^T. The output copy C is
identified with A by the map eta (identity by default).
"""

from dataclasses import dataclass, field

import numpy as np

from . import config
from .composite import kron
from .errors import (
    CorrectionNotContractive,
    InvalidEffect,
    InvalidState,
    NotAGroup,
    NotEquivariant,
    NotObservable,
    NotTransitive,
    SearchBudgetExceeded,
)
from .geometry import Cone, cone_contains
from .scalar import allclose, all_nonneg, eye, inv, is_exact, promote, rank, solve, zeros
from .statespace import (
    PositiveMap,
    dual_space,
    find_order_isomorphism,
    is_norm_contractive,
    is_positive_map,
    is_weakly_self_dual,
    order_isomorphisms,
    symmetries,
)


def _mat(X):
    return X.matrix if isinstance(X, PositiveMap) else np.asarray(X)


def _pos(x):
    return x > (0 if is_exact(np.asarray([x])) else config.get_eps())


@dataclass
class TeleportScheme:
    space: object
    effects: list  # matrices F_i (dA x dB)
    omega: object  # matrix W (dB x dA)
    corrections: list  # matrices tau_i on A
    identification: object = None  # eta, identity when None
    mu: list = field(default_factory=list)  # omega_hat o f_hat_i
    group: list = field(default_factory=list)
    probabilities: list = field(default_factory=list)
    through: object = None  # the space B carried by the resource state


# ---------------------------------------------------------------------------
# conclusive teleportation


def effect_on_min(A, B, F):
    """f is an effect of A (x)min B: 0 <= f <= u on products of vertices."""
    F, VA = promote(np.asarray(F), A.omega_vertices)
    vals = VA @ F @ promote(B.omega_vertices, F)[0].T
    return all_nonneg(vals) and all_nonneg(1 - vals)


def state_on_max(B, C, W):
    """omega is a normalized state of B (x)max C."""
    W = np.asarray(W)
    if not allclose(B.unit @ W @ C.unit, B.unit[0] * 0 + 1):
        return False
    return all_nonneg(B.cone.facets @ W @ C.cone.facets.T)


@dataclass
class ConclusiveVerdict:
    valid: bool
    min_probability: object = None
    max_probability: object = None
    reason: str = ""

    def __bool__(self):
        return self.valid


def verify_conclusive(A, B, F, W, tau, eta=None):
    """Check tau(mu(alpha)) = ||mu(alpha)|| eta(alpha) on Omega_A.

    The identity is checked on every vertex and on every midpoint of two
    vertices. The vertices span, and the midpoints force ||mu(.)|| to be
    constant, which is what makes the identity hold on all mixtures.
    """
    F, W, T = (_mat(X) for X in (F, W, tau))
    if F.shape != (A.dim, B.dim) or not effect_on_min(A, B, F):
        raise InvalidEffect("f is not an effect of A (x)min B")
    if W.shape != (B.dim, A.dim) or not state_on_max(B, A, W):
        raise InvalidState("omega is not a normalized state of B (x)max A")
    if not is_positive_map(T, A, A) or not is_norm_contractive(T, A, A):
        raise CorrectionNotContractive("correction must be positive and norm-contractive")
    E = eye(A.dim, A.exact) if eta is None else _mat(eta)
    mu = W.T @ F.T
    V = A.omega_vertices
    probs = [A.unit @ (mu @ v) for v in V]
    if not all(_pos(p) for p in probs):
        return ConclusiveVerdict(False, min(probs), max(probs), "success probability vanishes on a vertex")
    points = list(V) + [(V[i] + V[j]) / 2 for i in range(len(V)) for j in range(i + 1, len(V))]
    for a in points:
        lhs = T @ (mu @ a)
        rhs = (A.unit @ (mu @ a)) * (E @ a)
        if not allclose(lhs, rhs):
            return ConclusiveVerdict(False, min(probs), max(probs), "teleportation identity fails")
    return ConclusiveVerdict(True, min(probs), max(probs))


@dataclass
class CompressionVerdict:
    compression: bool
    idempotent: bool
    positive: bool

    def __bool__(self):
        return self.compression


def compression_check(B, P):
    """P : B* -> B* is positive and idempotent."""
    P = _mat(P)
    D = dual_space(B)
    idem = allclose(P @ P, P)
    pos = is_positive_map(P, D, D)
    return CompressionVerdict(idem and pos, idem, pos)


def _range_cone(B, P):
    """Range of P with the inherited cone, in coordinates of a range basis Q."""
    from .scalar import independent_rows

    P = _mat(P)
    cols = [int(i) for i in independent_rows(P.T)]
    Q = P[:, cols]
    D = dual_space(B)
    images = [P @ f for f in D.cone.rays]
    coords = [c for c in (solve(Q, y) for y in images) if not allclose(c, 0 * c)]
    return Q, Cone.from_rays(np.array(coords))


def range_iso_check(A, B, P):
    """An order isomorphism J from A onto the range of P (as a map A -> B*), or None."""
    Q, K = _range_cone(B, P)
    if K.dim != A.dim:
        return None
    iso = find_order_isomorphism(A.cone, K)
    if iso is None:
        return None
    return PositiveMap(Q @ iso.matrix, A, dual_space(B))


def protocol_from_compression(A, B, P, J=None):
    """Build (f, omega, tau) from a compression P and an isomorphism J : A -> range(P).

    f_hat = kappa J and omega_hat = c J^-1 P, so mu = c kappa id and tau = id.
    """
    P = _mat(P)
    if J is None:
        J = range_iso_check(A, B, P)
        if J is None:
            raise ValueError("A is not order-isomorphic to the range of P")
    J = _mat(J)
    # left inverse of J on the range: L J = id
    L = inv(J.T @ J) @ J.T
    omega_hat = L @ P
    W = omega_hat.T
    W = W / (B.unit @ W @ A.unit)
    Fraw = J.T
    vals = A.omega_vertices @ Fraw @ B.omega_vertices.T
    F = Fraw / vals.max()
    tau = eye(A.dim, A.exact)
    mu = W.T @ F.T
    prob = A.unit @ mu @ A.omega_vertices[0]
    return TeleportScheme(A, [F], W, [tau], None, [mu], [], [prob], B)


# ---------------------------------------------------------------------------
# deterministic teleportation from a group


def check_group(group):
    """Closure, identity and inverses of a finite list of matrices."""
    G = [_mat(g) for g in group]
    d = G[0].shape[0]
    exact_mode = is_exact(G[0])
    I = eye(d, exact_mode)

    def member(x):
        return any(allclose(x, h) for h in G)

    if not member(I):
        raise NotAGroup("the identity is missing")
    for g in G:
        if rank(g) < d:
            raise NotAGroup("a group element is not invertible")
        for h in G:
            if not member(g @ h):
                raise NotAGroup("the set is not closed under composition")
    return G


def _orbit_is_everything(A, G):
    V = A.omega_vertices
    seen = [False] * len(V)
    for g in G:
        img = g @ V[0]
        for k, v in enumerate(V):
            if allclose(img, v):
                seen[k] = True
    return all(seen)


def is_equivariant(G, Phi):
    """g Phi g^T = Phi: Phi intertwines the dual action g^-T with the action g."""
    return all(allclose(g @ Phi @ g.T, Phi) for g in G)


def symmetric_iso(A, G, budget=None):
    """A G-equivariant order isomorphism A* -> A, normalized so u^T Phi u = 1."""
    D = dual_space(A)
    for iso in order_isomorphisms(D, A, budget):
        Phi = iso.matrix
        cands = [Phi]
        avg = sum((g @ Phi @ g.T for g in G), zeros(Phi.shape, is_exact(Phi))) / len(G)
        cands.append(avg)
        for C in cands:
            if rank(C) < A.dim or not is_equivariant(G, C):
                continue
            if is_positive_map(C, D, A) and is_positive_map(inv(C), A, D):
                return C / (A.unit @ C @ A.unit)
    return None


def build_deterministic_from_group(A, group, omega=None, budget=None):
    """E = {f_g}, f_hat_g = |G|^-1 omega_hat^-1 o g, with corrections tau_g = g^-1.

    ``omega`` is the matrix W of a state on A (x) A; when omitted, a
    G-equivariant order isomorphism A* -> A is searched for.
    """
    G = check_group(group)
    D = dual_space(A)
    for g in G:
        if not is_positive_map(g, A, A) or not is_positive_map(inv(g), A, A):
            raise NotAGroup("group elements must be order automorphisms")
    if not _orbit_is_everything(A, G):
        raise NotTransitive("the group does not act transitively on the pure states")
    if omega is None:
        Phi = symmetric_iso(A, G, budget)
        if Phi is None:
            raise NotEquivariant("no equivariant order isomorphism A* -> A was found")
    else:
        Phi = _mat(omega).T
        if rank(Phi) < A.dim or not (is_positive_map(Phi, D, A) and is_positive_map(inv(Phi), A, D)):
            raise NotEquivariant("omega_hat is not an order isomorphism")
        if not is_equivariant(G, Phi):
            raise NotEquivariant("omega_hat does not intertwine the group actions")
    W = Phi.T
    n = len(G)
    Phinv = inv(Phi)
    effects = [(Phinv @ g).T / n for g in G]
    total = sum(effects[1:], effects[0])
    if not allclose(total, np.outer(A.unit, A.unit)):
        raise NotObservable("the effects do not sum to the unit of the composite")
    for F in effects:
        if not effect_on_min(A, A, F):
            raise NotObservable("an outcome is not an effect")
    corrections = [inv(g) for g in G]
    mus = [W.T @ F.T for F in effects]
    probs = [A.unit @ m @ A.omega_vertices[0] for m in mus]
    return TeleportScheme(A, effects, W, corrections, None, mus, G, probs, A)


def effect_in_max_dual(A, F):
    """f is nonnegative on A (x)max A: F lies in the cone of products of dual rays."""
    Fd = A.cone.facets
    P = np.array([kron(a, b) for a in Fd for b in Fd])
    P, f = promote(P, np.asarray(F).reshape(-1))
    K = Cone(rays=P)
    return bool(cone_contains(K, f))


@dataclass
class DeterministicVerdict:
    valid: bool
    probabilities: list = field(default_factory=list)
    failed: object = None  # outcome index
    reason: str = ""

    def __bool__(self):
        return self.valid


def verify_deterministic(A, effects, omega, corrections=None):
    """Every outcome is correctable and the outcome probabilities sum to 1.

    For outcome i, mu_i = omega_hat o f_hat_i must be invertible with u o mu_i
    constant (= p_i) on Omega_A; tau_i = p_i mu_i^-1 must be positive and
    norm-contractive and return every vertex exactly.
    """
    W = _mat(omega)
    if not state_on_max(A, A, W):
        return DeterministicVerdict(False, reason="omega is not a normalized state")
    V = A.omega_vertices
    probs = []
    for i, F in enumerate(effects):
        F = _mat(F)
        if not effect_on_min(A, A, F):
            return DeterministicVerdict(False, probs, i, "outcome is not an effect")
        mu = W.T @ F.T
        if rank(mu) < A.dim:
            return DeterministicVerdict(False, probs, i, "outcome map is not invertible")
        pv = [A.unit @ mu @ v for v in V]
        if not all(allclose(p, pv[0]) for p in pv) or not _pos(pv[0]):
            return DeterministicVerdict(False, probs, i, "outcome probability depends on the input")
        p = pv[0]
        tau = p * inv(mu) if corrections is None else _mat(corrections[i])
        if not is_positive_map(tau, A, A):
            return DeterministicVerdict(False, probs, i, "correction is not positive")
        if not is_norm_contractive(tau, A, A):
            return DeterministicVerdict(False, probs, i, "correction is not norm-contractive")
        for v in V:
            if not allclose(tau @ (mu @ v) / p, v):
                return DeterministicVerdict(False, probs, i, "correction does not return the input")
        probs.append(p)
    total = sum(probs[1:], probs[0]) if probs else 0
    if not allclose(total, total * 0 + 1):
        return DeterministicVerdict(False, probs, None, "outcome probabilities do not sum to 1")
    return DeterministicVerdict(True, probs)


# ---------------------------------------------------------------------------
# weak self-duality diagnostic


@dataclass
class NecessityReport:
    weakly_self_dual: bool
    protocol_found: bool
    consistent: bool
    candidates: int  # effects examined
    pairs: int  # (effect, symmetry) pairs examined
    scheme: object = None
    source: str = ""  # which candidate family produced the protocol


def _candidate_effects(A, budget):
    """Full-rank extreme effects of A (x)min A, plus order isomorphisms A -> A*.

    The second family covers simplices, whose only extreme effects are
    products (rank one).
    """
    R = A.cone.rays
    K = Cone(facets=np.array([kron(r, s) for r in R for s in R]))
    d = A.dim
    V = A.omega_vertices
    out = []
    for ray in K.rays:
        F = ray.reshape(d, d)
        if rank(F) == d:
            out.append(("extreme", F))
    for iso in order_isomorphisms(A, dual_space(A), budget):
        out.append(("isomorphism", iso.matrix.T))
    scaled = []
    for kind, F in out:
        m = (V @ F @ V.T).max()
        scaled.append((kind, F / m))
    return scaled


def weak_self_duality_necessity(A, budget=None, iso_budget=None):
    """Search A (x)min (A (x)max A) for a conclusive protocol and compare with weak self-duality.

    A protocol needs mu = omega_hat o f_hat = c g for a symmetry g of Omega_A,
    so for each candidate effect the resource state is determined:
    omega_hat = c g f_hat^-1. It is accepted when it is a state of
    A (x)max A and the resulting scheme passes ``verify_conclusive``.
    """
    budget = config.PROTOCOL_PAIR_BUDGET if budget is None else budget
    wsd = bool(is_weakly_self_dual(A, budget=iso_budget))
    cands = _candidate_effects(A, iso_budget)
    syms = symmetries(A, iso_budget)
    if len(cands) * len(syms) > budget:
        raise SearchBudgetExceeded(f"{len(cands) * len(syms)} candidate pairs exceed the budget {budget}")
    Fd = A.cone.facets
    pairs = 0
    found, source = None, ""
    for kind, F in cands:
        fhat_inv = inv(F.T)
        for g in syms:
            pairs += 1
            Om = g @ fhat_inv
            W = Om.T
            if not all_nonneg(Fd @ W @ Fd.T):
                continue
            W = W / (A.unit @ W @ A.unit)
            mu = W.T @ F.T
            p = A.unit @ mu @ A.omega_vertices[0]
            tau = p * inv(mu)
            try:
                ok = verify_conclusive(A, A, F, W, tau)
            except (InvalidEffect, InvalidState, CorrectionNotContractive):
                ok = False
            if ok:
                found = TeleportScheme(A, [F], W, [tau], None, [mu], [], [p], A)
                source = kind
                break
        if found is not None:
            break
    consistent = wsd or found is None
    return NecessityReport(wsd, found is not None, consistent, len(cands), pairs, found, source)
