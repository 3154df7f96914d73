"""Pure numpy residue scan, used when the compiled kernel is unavailable."""
from __future__ import annotations

import numpy as np


def zero_mask(exps: np.ndarray, coeffs: np.ndarray, modulus: int) -> np.ndarray:
    """Same contract as the compiled ``zero_mask``."""
    m = int(modulus)
    nterms, n = exps.shape
    maxe = int(exps.max()) if exps.size else 0
    xs = np.arange(m, dtype=np.int64)
    pw = np.empty((maxe + 1, m), dtype=np.int64)
    pw[0] = 1 % m
    for e in range(1, maxe + 1):
        pw[e] = (pw[e - 1] * xs) % m
    acc = np.zeros((m,) * n, dtype=np.int64)
    for t in range(nterms):
        val = np.full((1,) * n, int(coeffs[t]) % m, dtype=np.int64)
        for j in range(n):
            e = int(exps[t, j])
            if e:
                shape = [1] * n
                shape[j] = m
                val = (val * pw[e].reshape(shape)) % m
        acc = (acc + val) % m
    return (acc == 0).astype(np.uint8).reshape(-1)
