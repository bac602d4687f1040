"""Independent re-checking of reports.

Every check works from the data stored in the report. Where possible a claim
is confirmed by substitution (observable sums, LP certificates, protocol
identities). Cone descriptions are confirmed by brute-force enumeration over
(d-1)-subsets, a different algorithm from the double description used to
produce them. The few claims that are exhaustive searches (a NO from the
broadcasting search, for instance) are confirmed by recomputation, and those
checks are named "recomputed".
"""

import itertools
import math
from fractions import Fraction

import numpy as np

from . import config
from .bitcommit import (
    CommitmentScheme,
    NotFound,
    cheat_binding,
    committed_mixture,
    find_double_decomposition,
    simulate_honest,
)
from .composite import kron
from .geometry import same_ray_set
from .infotasks import (
    distinguish_system,
    irreducible_decomposition,
    is_broadcastable,
    marginal_maps,
)
from .lp import check_farkas
from .scalar import allclose, all_nonneg, eye, inv, is_exact, nullspace, promote, rank, to_float
from .serialize import REPORT_FORMAT, decode_checked, digest, space_from_json
from .statespace import dual_space, find_order_isomorphism

#: Largest number of (d-1)-subsets enumerated by the brute-force cone check.
BRUTE_FORCE_LIMIT = 200_000


class CheckFailed(Exception):
    def __init__(self, name, detail=""):
        super().__init__(f"{name}: {detail}" if detail else name)
        self.name = name
        self.detail = detail


class Checker:
    def __init__(self):
        self.passed = []

    def __call__(self, name, ok, detail=""):
        if not ok:
            raise CheckFailed(name, detail)
        self.passed.append(name)


def _strict_neg(x):
    return x < 0 if is_exact(np.asarray([x])) else x < -config.get_eps()


def _one_like(x):
    return Fraction(1) if is_exact(np.asarray(x)) else 1.0


# ---------------------------------------------------------------------------
# cone descriptions


def _tight_rank(M, v):
    """Rank of the rows of M that vanish on v."""
    vals = M @ v
    if is_exact(vals):
        rows = [M[i] for i in range(len(M)) if vals[i] == 0]
    else:
        rows = [M[i] for i in range(len(M)) if abs(vals[i]) <= config.get_eps() * 1e3]
    return rank(np.array(rows)) if rows else 0


def _brute_force_rays(G, d):
    """Extreme rays of {x : G x >= 0} (pointed) from every (d-1)-subset of G."""
    m = len(G)
    if d == 1:
        # a pointed half-line: the ray is whichever sign every row accepts
        one = G[0] * 0 + 1
        return np.array([one]) if all_nonneg(G @ one) else np.array([-one])
    Gf = np.asarray(to_float(G), dtype=float)
    scale = np.linalg.norm(Gf, axis=1)
    Gn = Gf / np.where(scale > 0, scale, 1)[:, None]
    seen = {}
    combos = itertools.combinations(range(m), d - 1)
    while True:
        chunk = list(itertools.islice(combos, 20_000))
        if not chunk:
            break
        idx = np.array(chunk)
        _, s, vt = np.linalg.svd(Gn[idx])
        full = s[:, -1] > 1e-9
        normal = vt[:, -1, :]
        vals = normal @ Gn.T
        pos = np.all(vals >= -1e-7, axis=1)
        neg = np.all(vals <= 1e-7, axis=1)
        for k in np.nonzero(full & (pos | neg))[0]:
            n = normal[k] if pos[k] else -normal[k]
            key = tuple(np.round(n / np.abs(n).max(), 7) + 0.0)
            seen.setdefault(key, (idx[k], n))
    out = []
    for rows_idx, n in seen.values():
        # confirm each float candidate exactly (or within eps in float mode)
        rows = G[list(rows_idx)]
        if is_exact(G):
            N = nullspace(rows)
            if N.shape[1] != 1:
                continue
            r = N[:, 0]
        else:
            r = n
        v = G @ r
        if all_nonneg(v):
            out.append(r)
        elif all_nonneg(-v):
            out.append(-r)
    return np.array(out) if out else np.zeros((0, d))


def check_cone_description(check, R, F, name="cone description"):
    """R and F are exactly the extreme rays and facet normals of one pointed cone."""
    R, F = promote(R, F)
    d = R.shape[1]
    check(f"{name}: facets nonnegative on rays", all_nonneg(F @ R.T))
    check(f"{name}: rays span", rank(R) == d)
    check(f"{name}: facets span", rank(F) == d)
    check(f"{name}: each ray is extreme", all(_tight_rank(F, r) == d - 1 for r in R))
    check(f"{name}: each facet is supporting", all(_tight_rank(R, f) == d - 1 for f in F))
    nr, nf = math.comb(len(R), d - 1), math.comb(len(F), d - 1)
    if min(nr, nf) > BRUTE_FORCE_LIMIT:
        check(f"{name}: brute force within limit", False,
              f"{min(nr, nf)} subsets exceed {BRUTE_FORCE_LIMIT}")
    if nf <= nr:
        found = _brute_force_rays(F, d)
        check(f"{name}: rays complete (brute force)", same_ray_set(found, R),
              f"{len(found)} rays found, {len(R)} listed")
    else:
        found = _brute_force_rays(R, d)
        check(f"{name}: facets complete (brute force)", same_ray_set(found, F),
              f"{len(found)} facets found, {len(F)} listed")


# ---------------------------------------------------------------------------
# per-kind checks


def _space(check, obj, mode, name="space"):
    try:
        A = space_from_json(obj, mode)
    except Exception as exc:  # noqa: BLE001 - reported as a failed check
        check(f"{name} loads", False, str(exc))
    check(f"{name}: unit strictly positive on rays",
          all(x > (0 if A.exact else config.get_eps()) for x in A.cone.rays @ A.unit))
    return A


def _verify_space(check, rep, dec, mode):
    A = _space(check, rep["inputs"]["space"], mode)
    check("result equals input space", rep["result"].get("space") == rep["inputs"]["space"])
    F = dec(rep["certificates"]["facets"])
    check_cone_description(check, A.cone.rays, F)
    v = rep["verdict"]
    check("verdict counts", v["dim"] == A.dim and v["rays"] == len(A.cone.rays)
          and v["facets"] == len(F))


def _verify_tensor(check, rep, dec, mode):
    inp = rep["inputs"]
    A = _space(check, inp["A"], mode, "factor A")
    B = _space(check, inp["B"], mode, "factor B")
    K = _space(check, rep["result"]["space"], mode, "composite")
    R, F = K.cone.rays, dec(rep["certificates"]["facets"])
    P = np.array([kron(r, s) for r in A.cone.rays for s in B.cone.rays])
    Fp = np.array([kron(f, g) for f in A.cone.facets for g in B.cone.facets])
    check("composite unit is u_A (x) u_B", allclose(K.unit, kron(A.unit, B.unit)))
    check("product states inside", all_nonneg(P @ F.T))
    check("inside the maximal tensor product", all_nonneg(R @ Fp.T))
    check_cone_description(check, R, F)
    kind = inp["kind"]
    if kind == "min":
        check("rays are the product rays", same_ray_set(R, P))
    else:
        check("facets are the product facets", same_ray_set(F, Fp))
    ent = rep["certificates"]["entangled"]
    listed = set()
    for e in ent:
        k = e["ray"]
        w = dec(e["witness"])
        check(f"witness {k} nonnegative on product rays", all_nonneg(P @ w))
        check(f"witness {k} negative on ray {k}", _strict_neg(w @ R[k]))
        listed.add(k)
    if kind == "max":
        for k in range(len(R)):
            if k not in listed:
                check(f"unlisted ray {k} is a product ray",
                      any(same_ray_set(R[k:k + 1], P[j:j + 1]) for j in range(len(P))))
    v = rep["verdict"]
    check("verdict counts", v["rays"] == len(R) and v["entangled"] == len(ent))
    coincide = same_ray_set(R, P) and same_ray_set(F, Fp)
    check("min/max coincidence claim", v["min_equals_max"] == coincide)


def _verify_distinguish(check, rep, dec, mode):
    A = _space(check, rep["inputs"]["space"], mode)
    S = dec(rep["inputs"]["states"])
    check("states are normalized", allclose(S @ A.unit, S[:, 0] * 0 + 1))
    check("states are in the cone", all_nonneg(S @ A.cone.facets.T))
    c = rep["certificates"]
    if rep["verdict"]["distinguishable"]:
        E = dec(c["effects"])
        check("one effect per state", E.shape == S.shape)
        check("observable sums to the unit", allclose(E.sum(axis=0), A.unit))
        check("effects are positive", all_nonneg(E @ A.cone.rays.T))
        check("a_i(w_j) = delta_ij", allclose(E @ S.T, eye(len(S), is_exact(E))))
    else:
        lam, mu = dec(c["farkas"]["lam"]), dec(c["farkas"]["mu"])
        A_eq, b_eq, A_ub, b_ub = distinguish_system(A, S)
        check("Farkas certificate", check_farkas((lam, mu), A_eq, b_eq, A_ub, b_ub))


def _verify_broadcast(check, rep, dec, mode):
    A = _space(check, rep["inputs"]["space"], mode)
    G = dec(rep["inputs"]["states"])
    cand = rep["inputs"].get("candidates")
    c = rep["certificates"]
    if not rep["verdict"]["broadcastable"]:
        cands = None if cand is None else list(dec(cand))
        again = is_broadcastable(A, list(G), cands)
        check("search recomputed", not again.broadcastable)
        return
    S = dec(c["simplex"])
    E = dec(c["effects"])
    one = _one_like(S)
    check("observable sums to the unit", allclose(E.sum(axis=0), A.unit))
    check("effects are positive", all_nonneg(E @ A.cone.rays.T))
    check("simplex is distinguished", allclose(E @ S.T, eye(len(S), is_exact(E))))
    check("one weight vector per state", len(c["coefficients"]) == len(G))
    for g, w in zip(G, c["coefficients"]):
        w = dec(w)
        check("hull weights nonnegative", all_nonneg(w))
        check("hull weights sum to 1", allclose(w.sum(), one))
        check("state is a mixture of the simplex", allclose(w @ S, g))
    M = dec(c["broadcaster"])
    expect = sum((np.outer(kron(s, s), a) for s, a in zip(S, E)), M * 0)
    check("broadcaster is sum_i s_i (x) s_i a_i", allclose(M, expect))
    MA, MB = marginal_maps(A, M)
    for g in G:
        check("marginal A reproduces the state", allclose(MA @ g, g))
        check("marginal B reproduces the state", allclose(MB @ g, g))


def _verify_nondisturb(check, rep, dec, mode):
    A = _space(check, rep["inputs"]["space"], mode)
    M = dec(rep["inputs"]["map"])
    R = A.cone.rays
    c = rep["certificates"]
    blocks = c["summands"]
    Ps = [dec(P) for P in c["projectors"]]
    I = eye(A.dim, A.exact)
    check("summands partition the rays", sorted(i for b in blocks for i in b) == list(range(len(R))))
    check("one projector per summand", len(Ps) == len(blocks))
    check("projectors sum to the identity", allclose(sum(Ps[1:], Ps[0]), I))
    for i, Pi in enumerate(Ps):
        for j, Pj in enumerate(Ps):
            check("projectors are orthogonal idempotents", allclose(Pi @ Pj, Pi if i == j else Pi * 0))
        for k in range(len(R)):
            target = R[k] if k in blocks[i] else R[k] * 0
            check(f"projector {i} on ray {k}", allclose(Pi @ R[k], target))
    fresh = irreducible_decomposition(A.cone)
    check("finest decomposition (recomputed)",
          sorted(map(sorted, blocks)) == sorted(sorted(s.indices) for s in fresh.summands))
    if rep["verdict"]["nondisturbing"]:
        cs = [decode_checked([x], A.exact)[0] for x in c["constants"]]
        check("constants nonnegative", all_nonneg(np.array(cs)))
        for b, cst in zip(blocks, cs):
            for k in b:
                check(f"ray {k} scaled by its summand constant", allclose(M @ R[k], cst * R[k]))
        check("map equals sum_i c_i id_i", allclose(M, sum((x * P for x, P in zip(cs, Ps)), M * 0)))
    else:
        k = c["counterexample"]
        r = R[k]
        Mr = M @ r
        piv = next(i for i in range(len(r)) if not allclose(r[i], r[i] * 0))
        lam = Mr[piv] / r[piv]
        if not allclose(Mr, lam * r):
            check("counterexample ray is not an eigenvector", True)
        elif _strict_neg(lam):
            check("counterexample ray is scaled negatively", True)
        else:
            blk = next(b for b in blocks if k in b)
            check("counterexample scaling differs within its summand",
                  any(not allclose(M @ R[j], lam * R[j]) for j in blk))


def _scheme_from(A, s, dec):
    d0 = [(decode_checked([x["p"]], A.exact)[0], dec(x["state"])) for x in s["decomp0"]]
    d1 = [(decode_checked([x["p"]], A.exact)[0], dec(x["state"])) for x in s["decomp1"]]
    return CommitmentScheme(A, dec(s["omega"]), d0, d1,
                            [dec(a) for a in s["exposers0"]], [dec(a) for a in s["exposers1"]])


def _is_vertex(A, v):
    return any(allclose(v, w) for w in A.omega_vertices)


def _verify_bitcommit(check, rep, dec, mode):
    A = _space(check, rep["inputs"]["space"], mode)
    v = rep["verdict"]
    if not v["found"]:
        check("no scheme exists (recomputed)", isinstance(find_double_decomposition(A), NotFound))
        return
    c = rep["certificates"]
    sch = _scheme_from(A, c["scheme"], dec)
    one = _one_like(sch.omega)
    V = A.omega_vertices
    for b in (0, 1):
        dec_b, ex_b = sch.decomp(b), sch.exposers(b)
        ps = np.array([p for p, _ in dec_b])
        check(f"decomposition {b} weights positive", all(_strict_neg(-p) for p in ps))
        check(f"decomposition {b} weights sum to 1", allclose(ps.sum(), one))
        check(f"decomposition {b} averages to omega",
              allclose(sum((p * m for p, m in dec_b), sch.omega * 0), sch.omega))
        check(f"decomposition {b} uses extreme points", all(_is_vertex(A, m) for _, m in dec_b))
        check(f"one exposer per state in decomposition {b}", len(ex_b) == len(dec_b))
        for (_, m), a in zip(dec_b, ex_b):
            vals = V @ a
            check("exposer is an effect", all_nonneg(vals) and all_nonneg(1 - vals))
            check("exposer is 1 on its state", allclose(a @ m, one))
            others = [x for w, x in zip(V, vals) if not allclose(w, m)]
            check("exposer is below 1 elsewhere", all(_strict_neg(x - 1) for x in others))
    check("decompositions are disjoint",
          not any(allclose(m0, m1) for _, m0 in sch.decomp0 for _, m1 in sch.decomp1))
    for h in c["hiding"]:
        n = h["n"]
        same = allclose(committed_mixture(sch, 0, n), committed_mixture(sch, 1, n))
        check(f"hiding claim for n={n}", same == h["equal"])
    for h in c["honest_exact"]:
        b, n = h["b"], h["n"]
        per = sum((p * (a @ m) for (p, m), a in zip(sch.decomp(b), sch.exposers(b))), one * 0)
        claimed = decode_checked([h["probability"]], A.exact)[0]
        check(f"honest acceptance b={b} n={n}", allclose(per ** n, claimed))
    runs = c["honest_runs"]
    if runs["runs"]:
        for b, (seed, rate) in enumerate(zip(runs["seeds"], runs["rates"])):
            again = simulate_honest(sch, b, runs["n"], runs["runs"], seed)
            check(f"seeded honest runs b={b} reproduce", again == rate)
    pts = [tuple(max(a @ w for a in sch.exposers(b)) for b in (0, 1)) for w in V]
    for row in c["binding"]:
        n = row["n"]
        p = decode_checked([row["probability"]], A.exact)[0]
        counts = [s["count"] for s in row["strategy"]]
        check(f"strategy for n={n} uses n subsystems", sum(counts) == n)
        p0, p1 = one, one
        for s in row["strategy"]:
            g = tuple(decode_checked(s["point"], A.exact))
            check(f"strategy point for n={n} is attained", any(allclose(np.array(g), np.array(q)) for q in pts))
            p0 = p0 * g[0] ** s["count"]
            p1 = p1 * g[1] ** s["count"]
        check(f"strategy for n={n} attains the stated value", allclose(p0 + p1 - 1, p))
        check(f"binding optimum for n={n} (recomputed)", allclose(cheat_binding(sch, n).probability, p))
        expected = (math.log2(p.numerator) - math.log2(p.denominator)) if isinstance(p, Fraction) \
            else math.log2(p)
        check(f"log2 column for n={n}", abs(row["log2"] - expected) <= 1e-12 * max(1, abs(expected)))


def _positive_on(A, T):
    """T maps Omega_A into the cone of A."""
    return all_nonneg(A.cone.facets @ T @ A.cone.rays.T)


def _contractive(A, T):
    return all_nonneg(1 - A.omega_vertices @ T.T @ A.unit)


def _check_conclusive(check, A, F, W, tau, prob):
    V = A.omega_vertices
    one = _one_like(W)
    vals = V @ F @ V.T
    check("outcome is an effect on the minimal composite", all_nonneg(vals) and all_nonneg(1 - vals))
    check("resource is normalized", allclose(A.unit @ W @ A.unit, one))
    check("resource is a state of the maximal composite", all_nonneg(A.cone.facets @ W @ A.cone.facets.T))
    check("correction is positive", _positive_on(A, tau))
    check("correction is norm-contractive", _contractive(A, tau))
    mu = W.T @ F.T
    pts = list(V) + [(V[i] + V[j]) / 2 for i in range(len(V)) for j in range(i + 1, len(V))]
    for a in pts:
        pa = A.unit @ mu @ a
        check("success probability is the stated constant", allclose(pa, prob))
        check("teleportation identity", allclose(tau @ (mu @ a), pa * a))


def _check_iso_to_dual(check, A, J):
    check("isomorphism is invertible", rank(J) == A.dim)
    check("isomorphism is positive into the dual", all_nonneg(A.cone.rays @ J @ A.cone.rays.T))
    Ji = inv(J)
    check("inverse is positive from the dual", all_nonneg(A.cone.facets @ Ji @ A.cone.facets.T))


def _verify_teleport(check, rep, dec, mode):
    A = _space(check, rep["inputs"]["space"], mode)
    v, c = rep["verdict"], rep["certificates"]
    m = v["mode"]
    scalar = lambda x: decode_checked([x], A.exact)[0]  # noqa: E731
    if m == "deterministic":
        G = [dec(g) for g in rep["inputs"]["elements"]]
        I = eye(A.dim, A.exact)
        check("group contains the identity", any(allclose(g, I) for g in G))
        check("group is closed", all(any(allclose(g @ h, k) for k in G) for g in G for h in G))
        V = A.omega_vertices
        orbit = [any(allclose(g @ V[0], w) for g in G) for w in V]
        check("group is transitive on pure states", all(orbit))
        Fs = [dec(F) for F in c["effects"]]
        W = dec(c["omega"])
        taus = [dec(t) for t in c["corrections"]]
        ps = [scalar(p) for p in c["probabilities"]]
        check("one outcome per group element", len(Fs) == len(G) == len(taus) == len(ps))
        check("effects sum to the composite unit", allclose(sum(Fs[1:], Fs[0]), np.outer(A.unit, A.unit)))
        check("probabilities sum to 1", allclose(sum(ps[1:], ps[0]), _one_like(W)))
        for g, F, tau, p in zip(G, Fs, taus, ps):
            check("correction inverts its group element", allclose(g @ tau, I))
            check("probability is 1/|G|", allclose(p * len(G), _one_like(W)))
            _check_conclusive(check, A, F, W, tau, p)
    elif m == "conclusive":
        if not v["valid"]:
            D = dual_space(A)
            check("no isomorphism onto the range (recomputed)", find_order_isomorphism(A, D) is None)
            return
        P = dec(rep["inputs"]["compression"])
        Bd = A.cone.facets  # rays of the dual cone of B = A
        check("compression is idempotent", allclose(P @ P, P))
        check("compression is positive", all_nonneg(A.cone.rays @ P @ Bd.T))
        J = dec(c["isomorphism"])
        _check_iso_to_dual(check, A, J)
        _check_conclusive(check, A, dec(c["effect"]), dec(c["omega"]), dec(c["correction"]),
                          scalar(c["probability"]))
        check("verdict probability", allclose(scalar(v["probability"]), scalar(c["probability"])))
    elif m == "necessity":
        from .teleport import weak_self_duality_necessity

        if v["weakly_self_dual"]:
            check("isomorphism supplied", "isomorphism" in c)
            _check_iso_to_dual(check, A, dec(c["isomorphism"]))
        else:
            check("not weakly self-dual (recomputed)",
                  find_order_isomorphism(A, dual_space(A)) is None)
        if v["protocol_found"]:
            s = c["scheme"]
            _check_conclusive(check, A, dec(s["effect"]), dec(s["omega"]), dec(s["correction"]),
                              scalar(s["probability"]))
        else:
            again = weak_self_duality_necessity(A, budget=rep["inputs"]["budget"])
            check("no protocol in the search (recomputed)",
                  not again.protocol_found and again.pairs == c["pairs"])
        check("consistency claim", v["consistent"] == (v["weakly_self_dual"] or not v["protocol_found"]))
    else:
        check("known teleport mode", False, m)


VERIFIERS = {
    "space": _verify_space,
    "tensor": _verify_tensor,
    "distinguish": _verify_distinguish,
    "broadcast": _verify_broadcast,
    "nondisturb": _verify_nondisturb,
    "bitcommit": _verify_bitcommit,
    "teleport": _verify_teleport,
}


def verify_report(rep, eps=None):
    """Run every check; return (ok, passed names, first failure or None)."""
    check = Checker()
    try:
        check("report format", isinstance(rep, dict) and rep.get("format") == REPORT_FORMAT)
        check("inputs digest", digest(rep["inputs"]) == rep["inputs_digest"])
        mode = rep["scalar"]
        check("scalar mode", mode in ("exact", "float"))
        exact_mode = mode == "exact"

        def dec(data):
            return decode_checked(data, exact_mode)

        fn = VERIFIERS.get(rep["kind"])
        check("known report kind", fn is not None, str(rep.get("kind")))
        with config.tolerance(eps if eps is not None else rep.get("eps", config.get_eps())):
            fn(check, rep, dec, mode)
    except CheckFailed as exc:
        return False, check.passed, exc
    except (KeyError, IndexError, TypeError, ValueError, ZeroDivisionError) as exc:
        return False, check.passed, CheckFailed("malformed report", f"{type(exc).__name__}: {exc}")
    return True, check.passed, None
