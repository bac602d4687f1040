"""Hot inner loops, compiled with numba when available.

Two kernels carry the heavy lifting:

* ``adjacent_pairs`` -- the combinatorial adjacency test of the double
  description method, run on boolean ray/constraint incidence matrices
  (scalar-free, so it serves exact and floating mode alike);
* ``simulate_reveals`` -- Monte Carlo of Bob's per-subsystem tests in the
  commitment protocol, driven by caller-supplied uniforms so both paths
  produce identical transcripts.

Set ``GPTLAB_DISABLE_NUMBA=1`` to use the pure-numpy versions.
"""

import numpy as np

from . import config

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy reference implementations


def adjacent_pairs_numpy(inc, pos, neg, need):
    if len(pos) == 0 or len(neg) == 0:
        return np.empty((0, 2), dtype=np.int64)
    inc = inc.astype(bool)
    P = inc[pos][:, None, :]
    N = inc[neg][None, :, :]
    common = (P & N).reshape(len(pos) * len(neg), -1)
    counts = common.sum(axis=1)
    cand = np.nonzero(counts >= need)[0]
    if len(cand) == 0:
        return np.empty((0, 2), dtype=np.int64)
    inc_i = inc.astype(np.int64)
    ok = []
    # a ray r "covers" the pair when its zero set contains the common zero set
    for start in range(0, len(cand), 4096):
        block = cand[start:start + 4096]
        hits = inc_i @ common[block].astype(np.int64).T
        covering = (hits == counts[block][None, :]).sum(axis=0)
        ok.append(block[covering == 2])
    ok = np.concatenate(ok)
    pi, ni = np.divmod(ok, len(neg))
    return np.stack([np.asarray(pos)[pi], np.asarray(neg)[ni]], axis=1).astype(np.int64)


def simulate_reveals_numpy(cdf, accept_prob, u_sample, u_measure):
    x = np.searchsorted(cdf, u_sample, side="right")
    x = np.minimum(x, len(cdf) - 1)
    passed = u_measure < accept_prob[x]
    return x.astype(np.int64), passed.all(axis=1)


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _adjacent_pairs_jit(inc, pos, neg, need):
        m, k = inc.shape
        out = np.empty((len(pos) * len(neg), 2), dtype=np.int64)
        count = 0
        common = np.empty(k, dtype=np.bool_)
        for a in range(len(pos)):
            p = pos[a]
            for b in range(len(neg)):
                q = neg[b]
                c = 0
                for j in range(k):
                    common[j] = inc[p, j] and inc[q, j]
                    if common[j]:
                        c += 1
                if c < need:
                    continue
                adjacent = True
                for r in range(m):
                    if r == p or r == q:
                        continue
                    covers = True
                    for j in range(k):
                        if common[j] and not inc[r, j]:
                            covers = False
                            break
                    if covers:
                        adjacent = False
                        break
                if adjacent:
                    out[count, 0] = p
                    out[count, 1] = q
                    count += 1
        return out[:count]

    @numba.njit(cache=True)
    def _simulate_reveals_jit(cdf, accept_prob, u_sample, u_measure):
        trials, n = u_sample.shape
        x = np.empty((trials, n), dtype=np.int64)
        accept = np.empty(trials, dtype=np.bool_)
        last = len(cdf) - 1
        for t in range(trials):
            ok = True
            for k in range(n):
                i = np.searchsorted(cdf, u_sample[t, k], side="right")
                if i > last:
                    i = last
                x[t, k] = i
                if not (u_measure[t, k] < accept_prob[i]):
                    ok = False
            accept[t] = ok
        return x, accept


def use_numba():
    return HAVE_NUMBA and not config.DISABLE_NUMBA


def adjacent_pairs(inc, pos, neg, need):
    """Pairs (p, n) of rays adjacent in the current double-description cone.

    ``inc[r, j]`` is true when ray ``r`` is tight on processed constraint
    ``j``. A pair is adjacent when its common tight set has at least
    ``need`` members and no third ray is tight on all of them.
    """
    pos = np.asarray(pos, dtype=np.int64)
    neg = np.asarray(neg, dtype=np.int64)
    if use_numba():
        return _adjacent_pairs_jit(np.ascontiguousarray(inc, dtype=np.bool_), pos, neg, need)
    return adjacent_pairs_numpy(inc, pos, neg, need)


def simulate_reveals(cdf, accept_prob, u_sample, u_measure):
    """Sample strings from ``cdf`` and run Bob's tests; returns (x, accept)."""
    args = (np.asarray(cdf, dtype=float), np.asarray(accept_prob, dtype=float),
            np.asarray(u_sample, dtype=float), np.asarray(u_measure, dtype=float))
    if use_numba():
        return _simulate_reveals_jit(*args)
    return simulate_reveals_numpy(*args)
