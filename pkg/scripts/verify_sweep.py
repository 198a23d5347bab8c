#!/usr/bin/env python3
"""Randomized correctness sweep: blocked GEMM vs the exact oracle.

Usage: verify_sweep.py [CASES] [SEED]
"""

import sys
import time

import numpy as np

from acap_gemm.blocking import BlockingParams, gemm_blocked
from acap_gemm.matrix import Matrix, new_matrix, reference_gemm


def main(cases=25, seed=0):
    rng = np.random.default_rng(seed)
    start = time.time()
    for case in range(cases):
        m = int(rng.integers(1, 257))
        n = int(rng.integers(1, 257))
        k = int(rng.integers(1, 513))
        params = BlockingParams(
            mc=8 * int(rng.integers(1, max(2, m // 8 + 1))),
            nc=8 * int(rng.integers(1, max(2, n // 8 + 1))),
            kc=int(rng.integers(1, k + 1)),
        )
        tiles = int(rng.choice([1, 2, 4, 8, 32]))
        A = Matrix(m, k, "u8", rng.integers(0, 256, (m, k), dtype=np.uint8))
        B = Matrix(k, n, "u8", rng.integers(0, 256, (k, n), dtype=np.uint8))
        ref = reference_gemm(new_matrix(m, n, "i32"), A, B)
        out, _ = gemm_blocked(new_matrix(m, n, "i32"), A, B, params, tiles=tiles)
        ok = (out.data == ref.data).all()
        print(f"case {case:3d}: dims=({m},{n},{k}) "
              f"ccp=({params.mc},{params.nc},{params.kc}) tiles={tiles:2d} "
              f"{'PASS' if ok else 'FAIL'}")
        if not ok:
            return 2
    print(f"{cases} cases in {time.time() - start:.1f} s")
    return 0


if __name__ == "__main__":
    args = [int(a) for a in sys.argv[1:3]]
    sys.exit(main(*args))
