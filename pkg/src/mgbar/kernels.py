"""Selects the compiled residue kernel when it was built, else the numpy one.

Set ``MGBAR_PURE=1`` to force the numpy implementation.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("MGBAR_PURE") == "1":
    _impl = _kernels_py
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "numpy"


def zero_mask(exps, coeffs, modulus: int, backend: str | None = None) -> np.ndarray:
    """Boolean array of shape (modulus,)*n marking zeros of the integer polynomial mod ``modulus``."""
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    n = exps.shape[1]
    coeffs = np.ascontiguousarray([int(c) % modulus for c in coeffs], dtype=np.int64)
    impl = {"numpy": _kernels_py, None: _impl}.get(backend)
    if impl is None:
        if backend != "cython":
            raise ValueError(f"unknown backend {backend!r}")
        from . import _kernels as impl  # type: ignore[attr-defined]
    flat = impl.zero_mask(exps, coeffs, int(modulus))
    return np.asarray(flat, dtype=bool).reshape((int(modulus),) * n)
