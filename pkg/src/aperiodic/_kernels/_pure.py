"""Pure-Python (numpy) fallbacks for the hot kernels.

Semantics must match ``_fast.pyx`` exactly; the kernel tests compare the two
backends element for element whenever the extension is available.
"""

import numpy as np

_CHUNK = 1 << 18


def _dist_to_lattice(s, alpha):
    """Euclidean distance of ``s*alpha`` to the integer lattice, per row of s."""
    frac = np.outer(s, alpha) % 1.0
    frac = np.minimum(frac, 1.0 - frac)
    if alpha.shape[0] == 1:
        return frac[:, 0]
    return np.sqrt(np.sum(frac * frac, axis=1))


def torus_tail_min(alpha, s_lo, s_hi):
    """min over s in [s_lo, s_hi] of s^(1/n) * dist(s*alpha, Z^n).

    Returns ``(value, argmin_s)``.
    """
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    n = alpha.shape[0]
    if s_lo < 1 or s_hi < s_lo:
        raise ValueError("need 1 <= s_lo <= s_hi")
    best = np.inf
    best_s = s_lo
    for start in range(s_lo, s_hi + 1, _CHUNK):
        stop = min(start + _CHUNK - 1, s_hi)
        s = np.arange(start, stop + 1, dtype=np.float64)
        vals = s ** (1.0 / n) * _dist_to_lattice(s, alpha)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            best_s = start + i
    return best, best_s


def torus_first_below(alpha, eps, s_max):
    """Least s in [1, s_max] with dist(s*alpha, Z^n) < eps; 0 if none."""
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    if eps <= 0:
        raise ValueError("eps must be positive")
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    for start in range(1, s_max + 1, _CHUNK):
        stop = min(start + _CHUNK - 1, s_max)
        s = np.arange(start, stop + 1, dtype=np.float64)
        hit = _dist_to_lattice(s, alpha) < eps
        if hit.any():
            return start + int(np.argmax(hit))
    return 0


def word_greedy_net(words, agree_len):
    """Greedy separated net over symbol rows.

    A candidate is rejected iff some already-kept row agrees with it on the
    first ``agree_len`` symbols.  In-order greedy selection therefore keeps
    exactly the first occurrence of each distinct ``agree_len``-prefix, which
    is what this computes.  Returns the kept row indices in scan order.
    """
    words = np.ascontiguousarray(words, dtype=np.int8)
    if words.ndim != 2:
        raise ValueError("words must be 2-D")
    count, depth = words.shape
    if agree_len < 1:
        raise ValueError("agree_len must be >= 1")
    if agree_len > depth:
        raise ValueError("agree_len exceeds word depth")
    prefix = words[:, :agree_len]
    nsym = int(prefix.max(initial=0)) + 1
    if agree_len * np.log2(max(nsym, 2)) < 62:
        # pack the prefix into a single integer key
        weights = (nsym ** np.arange(agree_len, dtype=np.int64))
        keys = prefix.astype(np.int64) @ weights
    else:
        keys = np.ascontiguousarray(prefix).view(
            np.dtype((np.void, prefix.dtype.itemsize * agree_len))).ravel()
    _, first = np.unique(keys, return_index=True)
    first.sort()
    return first.astype(np.int64)
