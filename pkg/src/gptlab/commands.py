"""Report builders behind the CLI subcommands.

Each ``cmd_*`` function runs one decision procedure or protocol and returns
a report dict (see ``serialize.make_report``). Reports embed their inputs in
full so ``verify`` can re-check them without access to the original files.
"""

import csv
import math
import os
import re
from fractions import Fraction

import numpy as np

from . import config
from .bitcommit import (
    NotFound,
    binding_series,
    cheat_binding,
    find_double_decomposition,
    hiding_check,
    honest_acceptance,
    maxmin_cheat_value,
    simulate_honest,
)
from .composite import entangled_rays, max_tensor, min_tensor
from .geometry import direct_sum, orthant, same_ray_set
from .infotasks import (
    is_broadcastable,
    is_nondisturbing,
    irreducible_decomposition,
    jointly_distinguishable,
    space_of_cone,
)
from .scalar import encode, format_scalar
from .serialize import (
    MixedModeError,
    load_json,
    make_report,
    space_from_json,
    space_to_json,
)
from .statespace import (
    classical_orthant_permutations,
    make_classical,
    make_irregular_hexagon,
    make_polygon,
    polygon_group,
    vertex_permutation_map,
    generate_group,
)
from .teleport import (
    build_deterministic_from_group,
    effect_in_max_dual,
    protocol_from_compression,
    range_iso_check,
    verify_conclusive,
    weak_self_duality_necessity,
)

# ---------------------------------------------------------------------------
# parsing of spaces, states, matrices and groups


def builtin_space(name):
    """A named space, or None when ``name`` is not a builtin."""
    key = name.strip().lower()
    if key == "square":
        return make_polygon(4)
    if key == "triangle":
        return make_polygon(3)
    if key == "irregular-hexagon":
        return make_irregular_hexagon()
    if key == "square+quadrant":
        sq = make_polygon(4)
        return space_of_cone(direct_sum(sq.cone, orthant(2)), "square+quadrant")
    m = re.fullmatch(r"(polygon|classical)\(?(\d+)\)?", key)
    if m:
        n = int(m.group(2))
        return make_polygon(n) if m.group(1) == "polygon" else make_classical(n)
    return None


def coerce(A, scalar):
    if scalar is None or scalar == ("exact" if A.exact else "float"):
        return A
    if scalar == "float":
        return A.to_float()
    raise MixedModeError(f"{A.label} has no exact coordinates; use --scalar float")


def load_space(token, scalar=None):
    """Builtin name (square, polygon5, classical3, ...) or a JSON file path."""
    A = builtin_space(token)
    if A is not None:
        return coerce(A, scalar)
    if not os.path.exists(token):
        raise ValueError(f"unknown space {token!r}: not a builtin name or an existing file")
    return space_from_json(load_json(token), scalar)


def parse_scalar_token(tok, exact_mode):
    try:
        x = Fraction(tok.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {tok!r}") from None
    return x if exact_mode else float(x)


def parse_vector(text, exact_mode):
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError(f"empty vector {text!r}")
    return np.array([parse_scalar_token(p, exact_mode) for p in parts],
                    dtype=object if exact_mode else float)


def parse_state(A, tok):
    """``vK`` (K-th vertex of Omega), ``center``, or comma-separated coordinates."""
    tok = tok.strip()
    V = A.omega_vertices
    m = re.fullmatch(r"v(\d+)", tok)
    if m:
        k = int(m.group(1))
        if k >= len(V):
            raise ValueError(f"{A.label} has only {len(V)} vertices (v0..v{len(V) - 1})")
        return V[k]
    if tok == "center":
        return A.center
    v = parse_vector(tok, A.exact)
    if v.shape != (A.dim,):
        raise ValueError(f"state {tok!r} has {len(v)} entries, the space has dimension {A.dim}")
    return v


def parse_matrix(text, exact_mode):
    rows = [parse_vector(r, exact_mode) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows must be nonempty and of equal length")
    return np.array(rows, dtype=object if exact_mode else float)


def parse_range(text):
    """``a..b`` (inclusive), ``a,b,c`` or a single integer."""
    text = text.strip()
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo < 1 or hi < lo:
            raise ValueError(f"bad range {text!r}")
        return list(range(lo, hi + 1))
    try:
        ns = [int(x) for x in text.split(",")]
    except ValueError:
        raise ValueError(f"bad range {text!r}") from None
    if any(n < 1 for n in ns):
        raise ValueError("n must be at least 1")
    return ns


def parse_group(A, name):
    """``Zn`` (rotations), ``Dn`` (rotations and reflections), ``Sn``, ``trivial``."""
    key = name.strip()
    m = re.fullmatch(r"([ZDS])(\d+)|trivial", key)
    if not m:
        raise ValueError(f"unknown group {name!r}; use Zn, Dn, Sn or trivial")
    n_vert = len(A.omega_vertices)
    if key == "trivial":
        from .scalar import eye

        return [eye(A.dim, A.exact)]
    letter, order = m.group(1), int(m.group(2))
    if letter == "S":
        if A.is_simplex() and A.label.startswith("classical"):
            G = classical_orthant_permutations(order)
            if order != A.dim:
                raise ValueError(f"S{order} does not act on {A.label}")
            return G
        if order == 3 and n_vert == 3:
            return polygon_group(A, "dihedral")
        gens = [vertex_permutation_map(A, [(k + 1) % n_vert for k in range(n_vert)]),
                vertex_permutation_map(A, [1, 0] + list(range(2, n_vert)))]
        if order != n_vert or any(g is None for g in gens):
            raise ValueError(f"S{order} does not act linearly on {A.label}")
        return generate_group(gens, A.exact)
    G = polygon_group(A, "cyclic" if letter == "Z" else "dihedral")
    expected = order if letter == "Z" else 2 * order
    if order != n_vert or len(G) != expected:
        raise ValueError(f"{letter}{order} does not act on the {n_vert} vertices of {A.label}")
    return G


# ---------------------------------------------------------------------------
# helpers


def _b(x):
    return bool(x)


def _default_command(*parts):
    return [str(p) for p in parts if p is not None]


def _s(x):
    return format_scalar(x)


# ---------------------------------------------------------------------------
# commands


def cmd_space(kind, param, scalar=None, command=None):
    """Build a space (classical n, polygon n) or load a custom JSON file."""
    if kind == "classical":
        A = make_classical(int(param))
    elif kind == "polygon":
        A = make_polygon(int(param))
    elif kind == "custom":
        A = space_from_json(load_json(param), scalar)
    elif kind == "builtin":
        A = builtin_space(param)
        if A is None:
            raise ValueError(f"unknown builtin {param!r}")
    else:
        raise ValueError(f"unknown space kind {kind!r}; use classical, polygon or custom")
    A = coerce(A, scalar)
    spec = space_to_json(A)
    inputs = {"kind": kind, "param": str(param), "space": spec}
    certs = {"facets": encode(A.cone.facets)}
    verdict = {"dim": A.dim, "rays": len(A.cone.rays), "facets": len(A.cone.facets),
               "simplex": _b(A.is_simplex())}
    return make_report(command or _default_command("space", kind, param), "space", A.exact,
                       inputs, verdict, certs, {"space": spec})


def cmd_tensor(A, B, kind="max", command=None):
    """Minimal or maximal tensor product, with entanglement witnesses for its extreme rays."""
    if kind not in ("min", "max"):
        raise ValueError("tensor kind must be min or max")
    if A.exact != B.exact:
        A, B = (A.to_float() if A.exact else A), (B.to_float() if B.exact else B)
    C = max_tensor(A, B) if kind == "max" else min_tensor(A, B)
    other = min_tensor(A, B) if kind == "max" else max_tensor(A, B)
    S = C.space
    ent = entangled_rays(C) if kind == "max" else []
    coincide = same_ray_set(C.cone.rays, other.cone.rays)
    spec = space_to_json(S, {"kind": kind, "factors": [A.label, B.label]})
    inputs = {"A": space_to_json(A), "B": space_to_json(B), "kind": kind}
    certs = {
        "facets": encode(S.cone.facets),
        "entangled": [{"ray": int(k), "witness": encode(v.witness)} for k, v in ent],
    }
    verdict = {"kind": kind, "rays": len(S.cone.rays), "entangled": len(ent),
               "min_equals_max": _b(coincide)}
    return make_report(command or _default_command("tensor", A.label, B.label, "--kind", kind),
                       "tensor", S.exact, inputs, verdict, certs, {"space": spec})


def cmd_distinguish(A, states, command=None):
    S = [np.asarray(s) for s in states]
    v = jointly_distinguishable(A, S)
    inputs = {"space": space_to_json(A), "states": encode(np.array(S))}
    if v.distinguishable:
        certs = {"effects": encode(np.array(v.effects)) if v.effects else []}
    else:
        lam, mu = v.certificate
        certs = {"farkas": {"lam": encode(lam), "mu": encode(mu)}}
    return make_report(command or _default_command("distinguish", A.label, f"{len(S)} states"),
                       "distinguish", A.exact, inputs, {"distinguishable": _b(v)}, certs)


def cmd_broadcast(A, states, candidates=None, budget=None, command=None):
    S = [np.asarray(s) for s in states]
    v = is_broadcastable(A, S, candidates, budget)
    inputs = {"space": space_to_json(A), "states": encode(np.array(S)),
              "candidates": encode(np.array(candidates)) if candidates is not None else None}
    verdict = {"broadcastable": _b(v), "complete": _b(v.complete), "searched": int(v.searched)}
    if v.broadcastable:
        certs = {
            "simplex": encode(np.array(v.simplex)),
            "effects": encode(np.array(v.effects)),
            "coefficients": [encode(np.asarray(c)) for c in v.coefficients],
            "broadcaster": encode(v.broadcaster.matrix),
        }
    else:
        certs = {"searched": int(v.searched)}
    return make_report(command or _default_command("broadcast", A.label, f"{len(S)} states"),
                       "broadcast", A.exact, inputs, verdict, certs)


def cmd_nondisturb(A, M, command=None):
    M = np.asarray(M)
    if M.shape != (A.dim, A.dim):
        raise ValueError(f"map must be {A.dim}x{A.dim}, got {M.shape}")
    v = is_nondisturbing(A.cone, M)
    dec = irreducible_decomposition(A.cone)
    inputs = {"space": space_to_json(A), "map": encode(M)}
    certs = {
        "summands": [list(s.indices) for s in dec.summands],
        "projectors": [encode(P) for P in dec.projectors],
    }
    if v.nondisturbing:
        certs["constants"] = [_s(c) for c in v.constants]
    else:
        certs["counterexample"] = int(v.counterexample)
        certs["reason"] = v.reason
    verdict = {"nondisturbing": _b(v), "summands": len(dec.summands)}
    return make_report(command or _default_command("nondisturb", A.label), "nondisturb",
                       A.exact, inputs, verdict, certs)


def _log2(p):
    if p <= 0:
        return None
    if isinstance(p, Fraction):
        return math.log2(p.numerator) - math.log2(p.denominator)
    return math.log2(p)


def write_binding_csv(path, rows):
    """Header row, comma separated, LF line endings, float probabilities."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "probability", "log2-probability"])
        for n, p, lg in rows:
            w.writerow([n, repr(float(p)), repr(float(lg))])


def cmd_bitcommit(A, ns, runs=10_000, seed=0, csv_path=None, hiding_max=4, honest_max=3,
                  command=None):
    ns = sorted(set(int(n) for n in ns))
    scheme = find_double_decomposition(A)
    inputs = {"space": space_to_json(A), "ns": ns, "runs": int(runs), "seed": int(seed)}
    cmd = command or _default_command("bitcommit", A.label, "--n", ",".join(map(str, ns)))
    if isinstance(scheme, NotFound):
        return make_report(cmd, "bitcommit", A.exact, inputs,
                           {"found": False, "reason": scheme.reason}, {})
    rows = binding_series(scheme, ns)
    if csv_path is not None:
        write_binding_csv(csv_path, rows)
    hide_ns = [n for n in range(1, min(hiding_max, max(ns)) + 1)]
    hiding = [{"n": n, "equal": _b(hiding_check(scheme, n))} for n in hide_ns]
    honest_ns = range(1, min(honest_max, max(ns)) + 1)
    honest = [{"b": b, "n": n, "probability": _s(honest_acceptance(scheme, b, n))}
              for b in (0, 1) for n in honest_ns]
    n_sim = max(ns)
    rates = [simulate_honest(scheme, b, n_sim, runs, seed + b) for b in (0, 1)] if runs else []
    binding = []
    for n, p, lg in rows:
        res = cheat_binding(scheme, n)
        binding.append({
            "n": n,
            "probability": _s(p),
            "log2": lg,
            "strategy": [{"point": [_s(g0), _s(g1)], "count": c}
                         for (g0, g1), c in sorted(res.strategy.items(), key=lambda kv: kv[1])],
        })
    slopes = [(binding[i + 1]["log2"] - binding[i]["log2"]) / (rows[i + 1][0] - rows[i][0])
              for i in range(len(rows) - 1)]
    certs = {
        "scheme": {
            "omega": encode(scheme.omega),
            "decomp0": [{"p": _s(p), "state": encode(m)} for p, m in scheme.decomp0],
            "decomp1": [{"p": _s(p), "state": encode(m)} for p, m in scheme.decomp1],
            "exposers0": [encode(a) for a in scheme.exposers0],
            "exposers1": [encode(a) for a in scheme.exposers1],
        },
        "hiding": hiding,
        "honest_exact": honest,
        "honest_runs": {"runs": int(runs), "n": n_sim, "seeds": [seed, seed + 1],
                        "rates": rates},
        "binding": binding,
    }
    verdict = {
        "found": True,
        "size": scheme.size,
        "perfectly_hiding": all(h["equal"] for h in hiding),
        "perfectly_sound": all(Fraction(h["probability"]) == 1 if A.exact
                               else abs(h["probability"] - 1) <= config.get_eps() for h in honest)
        and all(r == 1.0 for r in rates),
        "binding_n1": _s(cheat_binding(scheme, 1).probability),
        "log2_slopes": slopes,
        "maxmin_value": _s(maxmin_cheat_value(scheme)),
    }
    return make_report(cmd, "bitcommit", A.exact, inputs, verdict, certs)


def cmd_teleport_group(A, group_name, budget=None, command=None):
    G = parse_group(A, group_name)
    scheme = build_deterministic_from_group(A, G, budget=budget)
    inputs = {"space": space_to_json(A), "group": group_name, "elements": [encode(g) for g in G]}
    certs = {
        "effects": [encode(F) for F in scheme.effects],
        "omega": encode(scheme.omega),
        "corrections": [encode(t) for t in scheme.corrections],
        "probabilities": [_s(p) for p in scheme.probabilities],
    }
    verdict = {
        "mode": "deterministic",
        "valid": True,
        "outcomes": len(G),
        "effects_in_max_dual": all(_b(effect_in_max_dual(A, F)) for F in scheme.effects),
    }
    return make_report(command or _default_command("teleport", A.label, "--group", group_name),
                       "teleport", A.exact, inputs, verdict, certs)


def _scheme_certs(scheme):
    return {
        "effect": encode(scheme.effects[0]),
        "omega": encode(scheme.omega),
        "correction": encode(scheme.corrections[0]),
        "probability": _s(scheme.probabilities[0]),
    }


def cmd_teleport_conclusive(A, budget=None, command=None):
    """Conclusive teleportation through B = A via the identity compression on A*."""
    from .scalar import eye

    P = eye(A.dim, A.exact)
    inputs = {"space": space_to_json(A), "through": space_to_json(A), "compression": encode(P)}
    cmd = command or _default_command("teleport", A.label, "--conclusive")
    J = range_iso_check(A, A, P)
    if J is None:
        return make_report(cmd, "teleport", A.exact, inputs,
                           {"mode": "conclusive", "valid": False,
                            "reason": "A is not order-isomorphic to the range of the compression"},
                           {})
    scheme = protocol_from_compression(A, A, P, J)
    v = verify_conclusive(A, A, scheme.effects[0], scheme.omega, scheme.corrections[0])
    certs = _scheme_certs(scheme)
    certs["isomorphism"] = encode(J.matrix)
    verdict = {"mode": "conclusive", "valid": _b(v), "probability": _s(v.min_probability)}
    return make_report(cmd, "teleport", A.exact, inputs, verdict, certs)


def cmd_teleport_necessity(A, budget=None, command=None):
    rep = weak_self_duality_necessity(A, budget=budget)
    pair_budget = config.PROTOCOL_PAIR_BUDGET if budget is None else budget
    inputs = {"space": space_to_json(A), "budget": int(pair_budget)}
    certs = {"candidates": rep.candidates, "pairs": rep.pairs, "source": rep.source}
    if rep.scheme is not None:
        certs["scheme"] = _scheme_certs(rep.scheme)
    from .statespace import is_weakly_self_dual

    iso = is_weakly_self_dual(A).isomorphism
    if iso is not None:
        certs["isomorphism"] = encode(iso.matrix)
    verdict = {"mode": "necessity", "weakly_self_dual": _b(rep.weakly_self_dual),
               "protocol_found": _b(rep.protocol_found), "consistent": _b(rep.consistent)}
    return make_report(command or _default_command("teleport", A.label, "--necessity"),
                       "teleport", A.exact, inputs, verdict, certs)


__all__ = [
    "builtin_space", "load_space", "parse_state", "parse_matrix", "parse_range", "parse_group",
    "cmd_space", "cmd_tensor", "cmd_distinguish", "cmd_broadcast", "cmd_nondisturb",
    "cmd_bitcommit", "cmd_teleport_group", "cmd_teleport_conclusive", "cmd_teleport_necessity",
    "write_binding_csv",
]
