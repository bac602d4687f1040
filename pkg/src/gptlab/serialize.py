"""JSON encoding of state spaces and reports.

Exact rationals are written as "p/q" strings and floats as shortest
round-trip decimals. Every file carries its scalar mode in the header so a
mixed-mode load is refused. Keys are sorted, so equal inputs give
byte-identical files.
"""

import hashlib
import json

import numpy as np

from . import __version__
from .scalar import decode, encode
from .statespace import space_from_rays

SPACE_FORMAT = "gpt-lab/space"
REPORT_FORMAT = "gpt-lab/report"


class MixedModeError(ValueError):
    pass


def mode_name(exact_mode):
    return "exact" if exact_mode else "float"


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def digest(obj):
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def space_to_json(A, composite=None):
    out = {
        "format": SPACE_FORMAT,
        "version": __version__,
        "scalar": mode_name(A.exact),
        "label": A.label,
        "dim": A.dim,
        "rays": encode(A.cone.rays),
        "unit": encode(A.unit),
    }
    if composite is not None:
        out["composite"] = composite
    return out


def _infer_mode(values):
    flat = np.asarray(values, dtype=object).reshape(-1)
    return all(isinstance(x, (str, int)) and not isinstance(x, bool) for x in flat)


def space_from_json(obj, scalar=None):
    """Load a state space from a space file, a report embedding one, or a bare dict."""
    if obj.get("format") == REPORT_FORMAT:
        obj = obj["result"]["space"]
    if "rays" not in obj or "unit" not in obj:
        raise ValueError("a state space needs 'rays' and 'unit'")
    mode = obj.get("scalar")
    if mode is None:
        mode = "exact" if _infer_mode(obj["rays"]) and _infer_mode(obj["unit"]) else "float"
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown scalar mode {mode!r}")
    if scalar is not None and scalar != mode:
        raise MixedModeError(f"file is in {mode} mode, {scalar} was requested")
    is_exact_mode = mode == "exact"
    rays = decode_checked(obj["rays"], is_exact_mode)
    unit = decode_checked(obj["unit"], is_exact_mode)
    if rays.ndim != 2 or unit.shape != (rays.shape[1],):
        raise ValueError("rays must be a matrix and unit a vector of matching length")
    return space_from_rays(rays, unit, obj.get("label", "custom"))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def decode_checked(data, exact_mode):
    """Decode nested lists, refusing entries of the other scalar mode."""
    flat = np.asarray(data, dtype=object).reshape(-1)
    for x in flat:
        if isinstance(x, bool) or x is None:
            raise ValueError(f"not a scalar: {x!r}")
        if exact_mode and isinstance(x, float):
            raise MixedModeError(f"float entry {x!r} in an exact-mode file")
        if not exact_mode and isinstance(x, str):
            raise MixedModeError(f"string entry {x!r} in a float-mode file")
    try:
        return decode(data, exact_mode)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValueError(f"malformed numeric data: {exc}") from None


def make_report(command, kind, exact_mode, inputs, verdict, certificates, result=None,
                timing=None):
    """Assemble a report; ``timing`` stays null unless timing was requested."""
    from . import config

    return {
        "format": REPORT_FORMAT,
        "version": __version__,
        "command": list(command),
        "kind": kind,
        "scalar": mode_name(exact_mode),
        "eps": config.get_eps(),
        "inputs": inputs,
        "inputs_digest": digest(inputs),
        "verdict": verdict,
        "certificates": certificates,
        "result": result or {},
        "timing": timing,
    }
