"""Global numeric settings: floating tolerance, search budgets, numba switch."""

import contextlib
import os

#: Comparison tolerance used by every floating-mode test.
EPS = 1e-9

#: Maximum number of extreme rays handled by the order-isomorphism search.
ISO_RAY_BUDGET = 12

#: Largest candidate-subset size explored by the broadcastability search.
SUBSET_BUDGET = 8

#: Maximum number of (effect, state) pairs tried by the teleportation search.
PROTOCOL_PAIR_BUDGET = 200_000


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


#: Set GPTLAB_DISABLE_NUMBA=1 to force the pure-numpy kernels.
DISABLE_NUMBA = _env_flag("GPTLAB_DISABLE_NUMBA")


def set_eps(eps):
    global EPS
    eps = float(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    EPS = eps


def get_eps():
    return EPS


@contextlib.contextmanager
def tolerance(eps):
    """Temporarily run floating comparisons with a different tolerance."""
    old = EPS
    set_eps(eps)
    try:
        yield
    finally:
        set_eps(old)
