# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled hot kernels: torus lattice scans and greedy prefix nets.

Mirrors ``_pure.py``; keep the two in lockstep.
"""

from libc.math cimport sqrt, pow, floor
from libcpp.unordered_set cimport unordered_set

import numpy as np
cimport numpy as cnp

cnp.import_array()


def torus_tail_min(alpha, long s_lo, long s_hi):
    """min over s in [s_lo, s_hi] of s^(1/n) * dist(s*alpha, Z^n)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = \
        np.ascontiguousarray(alpha, dtype=np.float64).ravel()
    cdef Py_ssize_t n = a.shape[0]
    if s_lo < 1 or s_hi < s_lo:
        raise ValueError("need 1 <= s_lo <= s_hi")
    cdef double best = 1e308
    cdef long best_s = s_lo
    cdef double inv_n = 1.0 / n
    cdef long s
    cdef Py_ssize_t j
    cdef double acc, f, v
    for s in range(s_lo, s_hi + 1):
        acc = 0.0
        for j in range(n):
            f = s * a[j]
            f = f - floor(f)
            if f > 0.5:
                f = 1.0 - f
            acc += f * f
        v = pow(<double>s, inv_n) * sqrt(acc)
        if v < best:
            best = v
            best_s = s
    return best, best_s


def torus_first_below(alpha, double eps, long s_max):
    """Least s in [1, s_max] with dist(s*alpha, Z^n) < eps; 0 if none."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = \
        np.ascontiguousarray(alpha, dtype=np.float64).ravel()
    cdef Py_ssize_t n = a.shape[0]
    if eps <= 0:
        raise ValueError("eps must be positive")
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    cdef double eps2 = eps * eps
    cdef long s
    cdef Py_ssize_t j
    cdef double acc, f
    for s in range(1, s_max + 1):
        acc = 0.0
        for j in range(n):
            f = s * a[j]
            f = f - floor(f)
            if f > 0.5:
                f = 1.0 - f
            acc += f * f
            if acc >= eps2:
                break
        if acc < eps2:
            return s
    return 0


def word_greedy_net(words, long agree_len):
    """Greedy separated net over symbol rows.

    A row is rejected iff some already-kept row shares its first
    ``agree_len`` symbols, so the in-order greedy pass keeps exactly the
    first occurrence of each distinct prefix.  Prefixes pack into a 62-bit
    key when they fit, hashed in a C++ set; wider prefixes fall back to
    hashing the raw bytes.  Kept indices return in scan order.
    """
    cdef cnp.ndarray[cnp.int8_t, ndim=2, mode="c"] w = \
        np.ascontiguousarray(words, dtype=np.int8)
    cdef Py_ssize_t count = w.shape[0]
    cdef Py_ssize_t depth = w.shape[1]
    if agree_len < 1:
        raise ValueError("agree_len must be >= 1")
    if agree_len > depth:
        raise ValueError("agree_len exceeds word depth")
    cdef long nsym = 0
    cdef Py_ssize_t c, j
    for c in range(count):
        for j in range(agree_len):
            if w[c, j] > nsym:
                nsym = w[c, j]
    nsym += 1
    if nsym < 2:
        nsym = 2
    cdef cnp.ndarray[cnp.int64_t, ndim=1] kept = np.empty(count, dtype=np.int64)
    cdef Py_ssize_t nkept = 0
    cdef unordered_set[long long] seen
    cdef long long key
    cdef double bits = agree_len * (np.log2(float(nsym)))
    if bits < 62.0:
        seen.reserve(2 * count)
        for c in range(count):
            key = 0
            for j in range(agree_len):
                key = key * nsym + w[c, j]
            if seen.find(key) == seen.end():
                seen.insert(key)
                kept[nkept] = c
                nkept += 1
        return kept[:nkept].copy()
    byte_seen = set()
    mat = np.ascontiguousarray(w[:, :agree_len])
    for c in range(count):
        row = mat[c].tobytes()
        if row not in byte_seen:
            byte_seen.add(row)
            kept[nkept] = c
            nkept += 1
    return kept[:nkept].copy()
