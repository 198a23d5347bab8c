import numpy as np
import pytest

from acap_gemm.matrix import wrap_i32


def scalar_kernel(cr, ar, br, kc):
    """Independent 3-loop scalar kernel over one micro-panel pair.

    Innermost loop is a plain per-element dot product; shares nothing
    with the emulated mac16 path.
    """
    out = cr.astype(np.int64).copy()
    rows = ar.shape[1]
    cols = br.shape[1]
    for r in range(rows):
        for c in range(cols):
            out[r, c] += int(
                np.dot(ar[:kc, r].astype(np.int64), br[:kc, c].astype(np.int64))
            )
    return wrap_i32(out)


def random_panels(rng, kc, mr=8, nr=8):
    ar = rng.integers(0, 256, size=(kc, mr), dtype=np.uint8)
    br = rng.integers(0, 256, size=(kc, nr), dtype=np.uint8)
    return ar, br


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
