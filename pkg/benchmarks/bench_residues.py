"""Time the residue-scan kernel on both backends.

    python3 benchmarks/bench_residues.py [--repeat N]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from mgbar import kernels
from mgbar.chowring import load_topform
from mgbar.integrality import _integer_form

CASES = [("D⁶ mod 81", 81), ("D⁶ mod 125", 125), ("D⁶ mod 49", 49), ("D⁶ mod 64", 64)]


def bench(backend: str, modulus: int, repeat: int) -> tuple[float, np.ndarray]:
    exps, coeffs, _ = _integer_form(load_topform().form)
    best, mask = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        mask = kernels.zero_mask(exps, coeffs, modulus, backend=backend)
        best = min(best, time.perf_counter() - t)
    return best, mask


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'case':<14}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, m in CASES:
        times, masks = [], []
        for b in backends:
            t, mask = bench(b, m, args.repeat)
            times.append(t)
            masks.append(mask)
        if len(masks) > 1 and not np.array_equal(masks[0], masks[1]):
            raise SystemExit(f"{label}: backends disagree")
        row = f"{label:<14}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
