"""Functional emulation of the 8x8 UINT8 AIE micro-kernel.

The inner loop walks the k dimension with an unroll factor of 16. Each
unrolled iteration reads two 64-element vectors of the A micro-panel and
four 32-element vectors of the B micro-panel, then issues eight emulated
``mac16`` operations (128 8-bit MACs each, 1024 MACs per iteration) into
four 16-lane banks of 48-bit accumulators.

Lane mapping: accumulator ``a``, lane ``r + 8*c`` holds micro-tile element
(row ``r``, col ``2*a + c``). The observable contract is the resulting
micro-tile, not the lane order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix import wrap_i32

MR = 8
NR = 8
UNROLL = 16
MACS_PER_MAC16 = 128
ACC_LIMIT = 1 << 47  # 48-bit signed accumulator range


@dataclass
class KernelStats:
    mac16_calls: int = 0
    ar_reads64: int = 0
    br_reads32: int = 0
    cr_loads: int = 0
    cr_stores: int = 0
    macs: int = 0


@dataclass
class MicroPanels:
    """One A micro-panel (kc x mr) and one B micro-panel (kc x nr).

    Both are stored k-step major so each k-step's mr (resp. nr) elements
    are contiguous, mirroring the packed buffer layout.
    """

    ar: np.ndarray
    br: np.ndarray

    def __post_init__(self):
        if self.ar.ndim != 2 or self.ar.shape[1] != MR:
            raise ValueError(f"ar panel must be (kc, {MR}), got {self.ar.shape}")
        if self.br.ndim != 2 or self.br.shape[1] != NR:
            raise ValueError(f"br panel must be (kc, {NR}), got {self.br.shape}")
        if self.ar.shape[0] != self.br.shape[0]:
            raise ValueError("ar and br panel depths differ")


class AccBank:
    """Four accumulators x 16 lanes of 48-bit signed values."""

    def __init__(self):
        self.lanes = np.zeros((4, 16), dtype=np.int64)

    def to_tile(self) -> np.ndarray:
        """Rearrange lanes into the 8x8 micro-tile they cover."""
        tile = np.empty((MR, NR), dtype=np.int64)
        for a in range(4):
            tile[:, 2 * a] = self.lanes[a, 0:8]
            tile[:, 2 * a + 1] = self.lanes[a, 8:16]
        return tile


def mac16_emulated(acc: np.ndarray, a_slice: np.ndarray, b_slice: np.ndarray) -> np.ndarray:
    """One mac16: lane(r + 8c) += sum_t a_slice[t, r] * b_slice[t, c].

    ``a_slice`` is 8 k-steps x 8 rows, ``b_slice`` 8 k-steps x 2 cols:
    exactly 128 multiply-accumulates. Updates ``acc`` in place.
    """
    prod = a_slice.T.astype(np.int64) @ b_slice.astype(np.int64)  # (8 rows, 2 cols)
    acc += prod.T.reshape(16)
    if int(np.abs(acc).max()) >= ACC_LIMIT:
        raise OverflowError("48-bit accumulator range exceeded (internal bug)")
    return acc


def micro_kernel(cr: np.ndarray, panels: MicroPanels, kc: int):
    """Cr += Ar @ Br over one micro-panel pair.

    ``cr`` is the 8x8 int32 micro-tile loaded from global memory; the
    updated tile is returned (two's-complement wrap on store) together
    with the per-kernel read/mac ledger. A kc that is not a multiple of
    16 is zero-padded into a final partial iteration; the stats count the
    padded reads so the cost model stays uniform.
    """
    if kc < 1:
        raise ValueError("kc must be >= 1")
    if cr.shape != (MR, NR):
        raise ValueError(f"Cr tile must be {MR}x{NR}")

    iters = -(-kc // UNROLL)
    depth = iters * UNROLL
    ar = panels.ar
    br = panels.br
    if ar.shape[0] < depth:
        pad = depth - ar.shape[0]
        ar = np.vstack([ar, np.zeros((pad, MR), dtype=ar.dtype)])
        br = np.vstack([br, np.zeros((pad, NR), dtype=br.dtype)])

    stats = KernelStats()
    bank = AccBank()
    for it in range(iters):
        base = it * UNROLL
        a_blk = ar[base : base + UNROLL]
        b_blk = br[base : base + UNROLL]
        stats.ar_reads64 += 2   # two 64-element vectors of Ar
        stats.br_reads32 += 4   # four 32-element vectors of Br
        for a in range(4):
            cols = b_blk[:, 2 * a : 2 * a + 2]
            mac16_emulated(bank.lanes[a], a_blk[0:8], cols[0:8])
            mac16_emulated(bank.lanes[a], a_blk[8:16], cols[8:16])
            stats.mac16_calls += 2
    stats.macs = stats.mac16_calls * MACS_PER_MAC16
    stats.cr_loads = 1
    stats.cr_stores = 1

    new_cr = wrap_i32(cr.astype(np.int64) + bank.to_tile())
    return new_cr, stats
