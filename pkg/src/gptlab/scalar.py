"""Scalar handling and small dense linear algebra over two number systems.

Exact data lives in numpy object arrays of ``fractions.Fraction``; floating
data in ``float64`` arrays. The mode of an array is read off its dtype, so
every routine here works on either kind. Mixing the two promotes to float.
"""

from fractions import Fraction
from math import gcd

import numpy as np

from . import config


def is_exact(a):
    return np.asarray(a).dtype == object


def _to_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x)).limit_denominator(10**12)
    raise TypeError(f"cannot convert {x!r} to an exact scalar")


def exact(data):
    """Object array of Fractions (strings like ``"1/2"`` accepted)."""
    arr = np.asarray(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = _to_fraction(arr[idx])
    return out


def to_float(data):
    arr = np.asarray(data)
    if arr.dtype == object:
        return np.vectorize(float, otypes=[float])(arr) if arr.size else arr.astype(float)
    return arr.astype(float)


def promote(*arrays):
    """Bring arrays to a common mode: exact only if all inputs are exact."""
    arrs = [np.asarray(a) for a in arrays]
    if all(a.dtype == object for a in arrs):
        return arrs
    return [to_float(a) for a in arrs]


def like(data, ref):
    """Convert ``data`` into the mode of ``ref``."""
    if is_exact(ref):
        return exact(data)
    return to_float(data)


def zeros(shape, exact_mode):
    if exact_mode:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def eye(n, exact_mode):
    out = zeros((n, n), exact_mode)
    for i in range(n):
        out[i, i] = Fraction(1) if exact_mode else 1.0
    return out


def tol(a):
    return 0 if is_exact(a) else config.get_eps()


def is_zero(x, exact_mode=None):
    if exact_mode is None:
        exact_mode = isinstance(x, Fraction)
    if exact_mode:
        return x == 0
    return abs(float(x)) <= config.get_eps()


def allclose(a, b):
    a, b = promote(a, b)
    if a.shape != b.shape:
        return False
    if a.dtype == object:
        return bool(np.all(a == b))
    return bool(np.all(np.abs(a - b) <= config.get_eps() * np.maximum(1.0, np.abs(b))))


def all_nonneg(a):
    a = np.asarray(a)
    if a.dtype == object:
        return bool(np.all(a >= 0))
    return bool(np.all(a >= -config.get_eps()))


def format_scalar(x):
    """Exact rationals as ``"p/q"`` strings, floats as shortest round-trip."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return float(x)


def parse_scalar(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def encode(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return format_scalar(a.item() if a.dtype != object else a[()])
    return [encode(row) for row in a]


def decode(data, exact_mode):
    return exact(data) if exact_mode else to_float(np.asarray(data, dtype=float))


# ---------------------------------------------------------------------------
# integer helpers (exact double description works on primitive integer vectors)


def primitive(v):
    """Scale a rational vector to coprime integers, keeping its direction."""
    v = np.asarray(v, dtype=object)
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return np.array(ints, dtype=object)
    return np.array([x // g for x in ints], dtype=object)


def int_dot(M, v):
    """Row-wise dot products of integer object arrays (exact)."""
    return np.array([sum(a * b for a, b in zip(row, v)) for row in M], dtype=object)


# ---------------------------------------------------------------------------
# elimination


def rref(M):
    """Reduced row echelon form and pivot columns.

    Floating mode uses partial pivoting with an absolute threshold scaled by
    the largest entry; exact mode pivots on the first nonzero entry.
    """
    A = exact(M) if is_exact(M) else np.array(M, dtype=float, copy=True)
    if A.ndim != 2:
        raise ValueError("rref expects a matrix")
    exact_mode = A.dtype == object
    rows, cols = A.shape
    thresh = 0
    if not exact_mode and A.size:
        thresh = config.get_eps() * max(1.0, float(np.max(np.abs(A))))
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        if exact_mode:
            p = next((i for i in range(r, rows) if A[i, c] != 0), None)
        else:
            i = r + int(np.argmax(np.abs(A[r:, c])))
            p = i if abs(A[i, c]) > thresh else None
        if p is None:
            continue
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = A[r] / A[r, c]
        for i in range(rows):
            if i != r and (A[i, c] != 0 if exact_mode else A[i, c] != 0.0):
                A[i] = A[i] - A[i, c] * A[r]
        if not exact_mode:
            A[np.abs(A) <= thresh] = 0.0
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M):
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if M.ndim == 1:
        M = M[None, :]
    return len(rref(M)[1])


def nullspace(M):
    """Basis of {x : M x = 0} as columns of the returned matrix."""
    M = np.asarray(M)
    exact_mode = is_exact(M)
    cols = M.shape[1]
    if M.shape[0] == 0:
        return eye(cols, exact_mode)
    R, piv = rref(M)
    free = [c for c in range(cols) if c not in piv]
    N = zeros((cols, len(free)), exact_mode)
    for k, f in enumerate(free):
        N[f, k] = Fraction(1) if exact_mode else 1.0
        for i, p in enumerate(piv):
            N[p, k] = -R[i, f]
    return N


def solve(A, b):
    """Some solution of A x = b, or None when the system is inconsistent."""
    A, b = promote(A, b)
    exact_mode = A.dtype == object
    b2 = b.reshape(A.shape[0], -1)
    aug = np.concatenate([A, b2], axis=1)
    R, piv = rref(aug)
    n = A.shape[1]
    if any(p >= n for p in piv):
        return None
    x = zeros((n, b2.shape[1]), exact_mode)
    for i, p in enumerate(piv):
        x[p] = R[i, n:]
    if not exact_mode and not np.allclose(A @ x, b2, atol=1e3 * config.get_eps()):
        return None
    return x.reshape((n,) + b.shape[1:]) if b.ndim > 1 else x[:, 0]


def inv(A):
    A = np.asarray(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    exact_mode = is_exact(A)
    if not exact_mode:
        if rank(A) < n:
            raise np.linalg.LinAlgError("singular matrix")
        return np.linalg.inv(A)
    aug = np.concatenate([A, eye(n, True)], axis=1)
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise np.linalg.LinAlgError("singular matrix")
    return R[:, n:]


def independent_rows(M):
    """Indices of the first maximal linearly independent subset of rows."""
    M = np.asarray(M)
    if M.shape[0] == 0:
        return []
    return list(rref(M.T)[1])
