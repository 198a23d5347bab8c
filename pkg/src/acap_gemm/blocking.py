"""Five-loop blocked GEMM driver, packing routines, and CCP selection.

Loop nest (GotoBLAS2 order):

    L1: jc over n in steps of nc      -> selects a Bc / Cc column block
    L2: pc over k in steps of kc      -> packs Bc into Block RAM
    L3: ic over m in steps of mc      -> packs Ac into Ultra RAM
    L4: jr over nc in steps of nr     -> copies one Br to tile local memory
    L5: ir over mc in steps of mr     -> one micro-kernel per iteration
    L6: inside the micro-kernel, over kc

Loop L4 is the parallel loop: its nr-wide column strips are dealt
block-cyclically across the logical tiles, so distinct tiles write
disjoint strips of C and the result is schedule-independent.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError
from .matrix import Matrix, wrap_i32
from .microkernel import MicroPanels, micro_kernel

CR_BYTES_PER_ELEM = 4  # int32 micro-tile elements


@dataclass(frozen=True)
class BlockingParams:
    mc: int
    nc: int
    kc: int
    mr: int = 8
    nr: int = 8

    def __post_init__(self):
        for name in ("mc", "nc", "kc", "mr", "nr"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be strictly positive")
        if self.mc % self.mr:
            raise ValueError(f"mc={self.mc} not a multiple of mr={self.mr}")
        if self.nc % self.nr:
            raise ValueError(f"nc={self.nc} not a multiple of nr={self.nr}")


def paper_ccp() -> BlockingParams:
    # The published upper limits are kc=3750, mc ~= 4500, nc = 1200;
    # mc is rounded down to 4496, the nearest multiple of mr. Note that
    # nc=1200 does not actually fit the Block RAM together with kc=3750;
    # validate_footprints reports the overflow.
    return BlockingParams(mc=4496, nc=1200, kc=3750)


def select_ccp(mem, mr: int = 8, nr: int = 8, elem_bytes: int = 1,
               local_reserve_bytes: int = 0, kc_override: int | None = None) -> BlockingParams:
    """Derive (mc, nc, kc) from the memory-level capacities.

    kc fills the tile local memory (minus the reserve) with one kc x nr
    Br panel; mc then fills the Ultra RAM with one mc x kc Ac buffer and
    nc fills the Block RAM with one kc x nc Bc buffer, both rounded down
    to micro-kernel multiples.
    """
    if mr < 1 or nr < 1 or elem_bytes < 1:
        raise ValueError("mr, nr, elem_bytes must be strictly positive")
    if kc_override is not None:
        kc = kc_override
    else:
        kc = (mem.local - local_reserve_bytes) // (nr * elem_bytes)
    if kc < 1:
        raise CapacityError("local")
    mc = (mem.ultra // (kc * elem_bytes)) // mr * mr
    if mc < mr:
        raise CapacityError("ultra")
    nc = (mem.block_ram // (kc * elem_bytes)) // nr * nr
    if nc < nr:
        raise CapacityError("block_ram")
    return BlockingParams(mc=mc, nc=nc, kc=kc, mr=mr, nr=nr)


@dataclass
class PackedA:
    """mc/mr micro-panels of mr x kc, each k-step's mr column contiguous.

    panels[p][t][r] == source block element (p*mr + r, t); rows past the
    matrix edge are zero.
    """

    mc: int
    kc: int
    mr: int
    panels: np.ndarray = field(repr=False)  # (mc//mr, kc, mr) u8


@dataclass
class PackedB:
    """nc/nr micro-panels of kc x nr, each k-step's nr row contiguous.

    panels[q][t][c] == source block element (t, q*nr + c).
    """

    kc: int
    nc: int
    nr: int
    panels: np.ndarray = field(repr=False)  # (nc//nr, kc, nr) u8


def _check_offsets(m: Matrix, row0: int, col0: int):
    if not (0 <= row0 < m.rows and 0 <= col0 < m.cols):
        raise ValueError(
            f"block offset ({row0}, {col0}) outside {m.rows}x{m.cols} matrix"
        )


def pack_A(A: Matrix, row0: int, col0: int, params: BlockingParams) -> PackedA:
    """Pack the [row0, row0+mc) x [col0, col0+kc) block of A.

    Blocks that run past the matrix edge are clipped and zero-padded to
    full micro-panels; the packed depth is clipped to the available k.
    """
    _check_offsets(A, row0, col0)
    mr = params.mr
    rows = min(params.mc, A.rows - row0)
    kc = min(params.kc, A.cols - col0)
    mc_pad = -(-rows // mr) * mr
    block = np.zeros((mc_pad, kc), dtype=np.uint8)
    block[:rows] = A.data[row0 : row0 + rows, col0 : col0 + kc]
    panels = block.reshape(mc_pad // mr, mr, kc).transpose(0, 2, 1).copy()
    return PackedA(mc=mc_pad, kc=kc, mr=mr, panels=panels)


def pack_B(B: Matrix, row0: int, col0: int, params: BlockingParams) -> PackedB:
    """Pack the [row0, row0+kc) x [col0, col0+nc) block of B."""
    _check_offsets(B, row0, col0)
    nr = params.nr
    kc = min(params.kc, B.rows - row0)
    cols = min(params.nc, B.cols - col0)
    nc_pad = -(-cols // nr) * nr
    block = np.zeros((kc, nc_pad), dtype=np.uint8)
    block[:, :cols] = B.data[row0 : row0 + kc, col0 : col0 + cols]
    panels = block.reshape(kc, nc_pad // nr, nr).transpose(1, 0, 2).copy()
    return PackedB(kc=kc, nc=nc_pad, nr=nr, panels=panels)


def unpack_A(p: PackedA) -> np.ndarray:
    """Inverse of pack_A (up to zero padding): the (mc, kc) block."""
    return p.panels.transpose(0, 2, 1).reshape(p.mc, p.kc)


def unpack_B(p: PackedB) -> np.ndarray:
    """Inverse of pack_B (up to zero padding): the (kc, nc) block."""
    return p.panels.transpose(1, 0, 2).reshape(p.kc, p.nc)


# ---------------------------------------------------------------------------
# Transfer log

PACK_B = "pack_B"        # B block: ddr -> block_ram (Bc)
PACK_A = "pack_A"        # A block: ddr -> ultra (Ac)
COPY_BR = "copy_Br"      # one Br panel: block_ram -> local
STREAM_AR = "stream_Ar"  # one Ar panel: ultra -> registers
READ_BR = "read_Br"      # one Br panel: local -> registers
LOAD_CR = "load_Cr"      # micro-tile: ddr -> registers
STORE_CR = "store_Cr"    # micro-tile: registers -> ddr
KERNEL = "kernel"        # one micro-kernel invocation (k_steps recorded)


@dataclass(frozen=True)
class TransferEvent:
    kind: str
    operand: str
    src: str
    dst: str
    bytes: int
    tile: int
    key: tuple  # canonical loop indices (jc, pc, ic, jr, ir)
    k_steps: int = 0


class TransferLog:
    """Every modeled transfer, keyed by (loop indices, tile) for
    order-insensitive merging."""

    def __init__(self):
        self.events: list[TransferEvent] = []

    def add(self, kind, operand, src, dst, nbytes, tile, key, k_steps=0):
        self.events.append(
            TransferEvent(kind, operand, src, dst, nbytes, tile, key, k_steps)
        )

    def merge(self, other: "TransferLog"):
        self.events.extend(other.events)

    def sorted_events(self):
        return sorted(self.events, key=lambda e: (e.key, e.tile, e.kind))

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)

    def bytes_moved(self, kind: str) -> int:
        return sum(e.bytes for e in self.events if e.kind == kind)

    def br_copies_by_tile(self) -> dict:
        out: dict[int, int] = {}
        for e in self.events:
            if e.kind == COPY_BR:
                out[e.tile] = out.get(e.tile, 0) + 1
        return out

    def kernel_invocations(self) -> int:
        return self.count(KERNEL)

    def reuse_summary(self) -> dict:
        """Reuse factors implied by the logged traffic.

        Bc is packed once per L2 iteration and its panels read once per
        L3 iteration; Ac once per L4 iteration; Br once per L5 iteration;
        Cr is touched once per k-step of its micro-kernel.
        """

        def ratio(a, b):
            if b == 0:
                return 0
            return a // b if a % b == 0 else a / b

        k_steps = sum(e.k_steps for e in self.events if e.kind == KERNEL)
        return {
            "Bc": ratio(self.count(PACK_A), self.count(PACK_B)),
            "Ac": ratio(self.count(COPY_BR), self.count(PACK_A)),
            "Br": ratio(self.count(READ_BR), self.count(COPY_BR)),
            "Cr": ratio(k_steps, self.count(LOAD_CR)),
        }


# ---------------------------------------------------------------------------
# Blocked driver


def _run_tile(C, Ac, Bc, tile, tiles, kcb, jc, pc, ic, params):
    """All L4 iterations owned by one tile, for one (Ac, Bc) pair.

    Writes only the nr-wide C strips assigned to this tile, so tiles can
    run on concurrent workers.
    """
    log = TransferLog()
    mr, nr = params.mr, params.nr
    n_strips = Bc.panels.shape[0]
    m_panels = Ac.panels.shape[0]
    m, n = C.rows, C.cols
    for q in range(tile, n_strips, tiles):
        br = Bc.panels[q]
        j0 = jc + q * nr
        key4 = (jc, pc, ic, q, -1)
        log.add(COPY_BR, "Br", "block_ram", "local", br.size, tile, key4)
        for p in range(m_panels):
            ar = Ac.panels[p]
            i0 = ic + p * mr
            h = min(mr, m - i0)
            w = min(nr, n - j0)
            key = (jc, pc, ic, q, p)
            cr = np.zeros((mr, nr), dtype=np.int32)
            cr[:h, :w] = C.data[i0 : i0 + h, j0 : j0 + w]
            log.add(STREAM_AR, "Ar", "ultra", "registers", ar.size, tile, key)
            log.add(READ_BR, "Br", "local", "registers", br.size, tile, key)
            log.add(LOAD_CR, "Cr", "ddr", "registers",
                    mr * nr * CR_BYTES_PER_ELEM, tile, key)
            new_cr, _ = micro_kernel(cr, MicroPanels(ar, br), kcb)
            C.data[i0 : i0 + h, j0 : j0 + w] = new_cr[:h, :w]
            log.add(STORE_CR, "Cr", "registers", "ddr",
                    mr * nr * CR_BYTES_PER_ELEM, tile, key)
            log.add(KERNEL, "Cr", "registers", "registers", 0, tile, key,
                    k_steps=kcb)
    return log


def gemm_blocked(C: Matrix, A: Matrix, B: Matrix, params: BlockingParams,
                 tiles: int = 1, workers: int = 1):
    """Blocked C += A @ B, bit-exact against reference_gemm.

    Returns ``(C, TransferLog)``. ``tiles`` partitions loop L4
    block-cyclically over logical tiles; ``workers`` optionally executes
    the tile partitions on a thread pool (the result and the merged,
    canonically sorted log are identical for any worker count).
    """
    if A.elem_kind != "u8" or B.elem_kind != "u8" or C.elem_kind != "i32":
        raise ValueError("gemm_blocked expects u8 A/B and i32 C")
    m, k = A.shape
    k2, n = B.shape
    if k != k2 or C.shape != (m, n):
        raise ValueError(f"shape mismatch: A {A.shape}, B {B.shape}, C {C.shape}")
    if tiles < 1:
        raise ValueError("tiles must be >= 1")

    log = TransferLog()
    mc, nc, kc = params.mc, params.nc, params.kc
    for jc in range(0, n, nc):                                   # L1
        for pc in range(0, k, kc):                               # L2
            Bc = pack_B(B, pc, jc, params)
            kcb = Bc.kc
            log.add(PACK_B, "Bc", "ddr", "block_ram", Bc.panels.size, -1,
                    (jc, pc, -1, -1, -1))
            for ic in range(0, m, mc):                           # L3
                Ac = pack_A(A, ic, pc, params)
                log.add(PACK_A, "Ac", "ddr", "ultra", Ac.panels.size, -1,
                        (jc, pc, ic, -1, -1))
                tile_ids = list(range(tiles))
                if workers > 1:
                    with concurrent.futures.ThreadPoolExecutor(workers) as ex:
                        tile_logs = list(ex.map(
                            lambda t: _run_tile(C, Ac, Bc, t, tiles, kcb,
                                                jc, pc, ic, params),
                            tile_ids))
                else:
                    tile_logs = [_run_tile(C, Ac, Bc, t, tiles, kcb,
                                           jc, pc, ic, params)
                                 for t in tile_ids]
                for tl in tile_logs:
                    log.merge(tl)
    log.events = log.sorted_events()
    return C, log
