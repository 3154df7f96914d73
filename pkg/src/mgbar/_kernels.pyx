# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled residue scan: zero set of an integer polynomial on (Z/m)^n."""
import numpy as np


def zero_mask(const long long[:, ::1] exps, const long long[::1] coeffs, long long modulus):
    """Flat C-order uint8 array with 1 where sum_t coeffs[t] * x^exps[t] = 0 mod modulus.

    Coefficients must already be reduced into [0, modulus). For each choice of
    the leading n-1 coordinates the terms are collapsed into one coefficient per
    power of the last coordinate, so the innermost loop is a short dot product.
    """
    cdef Py_ssize_t nterms = exps.shape[0]
    cdef Py_ssize_t n = exps.shape[1]
    cdef Py_ssize_t t, j, outer, total_outer, base
    cdef long long m = modulus
    cdef long long maxe = 0, maxl = 0, acc, v, x, e
    if n == 0:
        raise ValueError("need at least one variable")
    for t in range(nterms):
        for j in range(n):
            if exps[t, j] > maxe:
                maxe = exps[t, j]
        if exps[t, n - 1] > maxl:
            maxl = exps[t, n - 1]
    pw_np = np.empty((m, maxe + 1), dtype=np.int64)
    cdef long long[:, ::1] pw = pw_np
    for x in range(m):
        pw[x, 0] = 1 % m
        for e in range(1, maxe + 1):
            pw[x, e] = (pw[x, e - 1] * x) % m
    # the unreduced inner sum stays below (maxl + 1) * m^2
    cdef bint lazy = (maxl + 1) * m < (<long long>1 << 62) // m
    total_outer = 1
    for j in range(n - 1):
        total_outer *= m
    out_np = np.zeros(total_outer * m, dtype=np.uint8)
    cdef unsigned char[::1] out = out_np
    digits_np = np.zeros(n, dtype=np.int64)
    cdef long long[::1] digits = digits_np
    s_np = np.zeros(maxl + 1, dtype=np.int64)
    cdef long long[::1] s = s_np
    for outer in range(total_outer):
        for e in range(maxl + 1):
            s[e] = 0
        for t in range(nterms):
            v = coeffs[t]
            for j in range(n - 1):
                e = exps[t, j]
                if e:
                    v = (v * pw[digits[j], e]) % m
            e = exps[t, n - 1]
            s[e] = (s[e] + v) % m
        base = outer * m
        for x in range(m):
            acc = 0
            if lazy:
                for e in range(maxl + 1):
                    acc += s[e] * pw[x, e]
                acc %= m
            else:
                for e in range(maxl + 1):
                    acc = (acc + (s[e] * pw[x, e]) % m) % m
            if acc == 0:
                out[base + x] = 1
        # advance the counter over the leading coordinates, last of them fastest
        j = n - 2
        while j >= 0:
            digits[j] += 1
            if digits[j] < m:
                break
            digits[j] = 0
            j -= 1
    return out_np
