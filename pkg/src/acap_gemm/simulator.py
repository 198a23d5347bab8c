"""Calibrated analytic cycle model of the multi-tile execution.

The model composes three measured ingredients per micro-kernel: the
streamed A-panel reads, the mac16 arithmetic, and the per-kernel C-tile
GMIO round trip, plus one B-panel copy per L4 iteration. Calibration
constants come from single-tile ablation measurements at kc=2048; the
overlap rule (baseline = max of the ar-only and mac-only components plus
a fixed epilogue) is the minimal model consistent with those
measurements, documented as a calibration rather than a
microarchitectural claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

UNROLL = 16

# Measured totals for the fixed-size strong-scaling experiment
# (m, n, k) = (mc, nc, kc) = (256, 256, 2048); used only to report the
# residual the model does not capture ("unmodeled overlap").
MEASURED_TOTALS = {
    1: 3_694_100,
    2: 1_916_000,
    4: 958_100,
    8: 498_900,
    16: 275_300,
    32: 162_900,
}
MEASURED_PROBLEM = (256, 256, 2048)

MODES = ("baseline", "read_ar_only", "mac_only")


def _default_cr_table():
    return {1: 40, 2: 58, 4: 63, 8: 84, 16: 157, 32: 282}


@dataclass
class CostModel:
    # Streaming one 64-element Ar vector from Ultra RAM.
    ar_read64_cycles: float = 19.0
    # Measured per-iteration cost once the two 64-element reads are
    # merged into one long read: 4106 cycles over 128 iterations.
    ar_merged_iter_cycles: float = 4106 / 128
    mac16_cycles: float = 1.0
    macs_per_iter_cycles: float = 8.0      # 8 mac16 calls per iteration
    loop_overhead_total: float = 18.0      # mac-only measured minus theoretical
    baseline_epilogue: float = 4.0         # baseline measured minus ar-only
    br_copy_cycles: float = 3280.0         # per Br copy, tile-count independent
    cr_copy_table: dict = field(default_factory=_default_cr_table)

    def __post_init__(self):
        for name in ("ar_read64_cycles", "ar_merged_iter_cycles", "mac16_cycles",
                     "macs_per_iter_cycles", "loop_overhead_total",
                     "baseline_epilogue", "br_copy_cycles"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        pts = sorted(self.cr_copy_table.items())
        if not pts:
            raise ValueError("cr_copy_table must not be empty")
        for (_, a), (_, b) in zip(pts, pts[1:]):
            if b < a:
                raise ValueError("cr_copy_table must be monotone nondecreasing")

    def cr_copy_cycles(self, tiles: int) -> float:
        """Cr GMIO round-trip cost; contention grows with the number of
        GMIO interfaces, so between table points we interpolate linearly
        in log2(tiles)."""
        if tiles < 1:
            raise ValueError("tiles must be >= 1")
        table = self.cr_copy_table
        if tiles in table:
            return float(table[tiles])
        pts = sorted(table.items())
        if tiles < pts[0][0]:
            return float(pts[0][1])
        if tiles > pts[-1][0]:
            (t0, y0), (t1, y1) = pts[-2], pts[-1]  # extrapolate last segment
        else:
            (t0, y0), (t1, y1) = next(
                (lo, hi) for lo, hi in zip(pts, pts[1:])
                if lo[0] < tiles < hi[0]
            )
        x, x0, x1 = math.log2(tiles), math.log2(t0), math.log2(t1)
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class CycleBreakdown:
    mode: str
    kc: int
    iters: int
    theoretical: int
    calibrated: int
    padded: bool = False


def microkernel_cycles(kc: int, mode: str, cm: CostModel) -> CycleBreakdown:
    """Theoretical vs calibrated cycles of one micro-kernel inner loop.

    read_ar_only models only the two 64-element Ar reads per iteration;
    mac_only the eight mac16 calls; baseline overlaps them (max of the
    two calibrated components plus the fixed epilogue). kc not a
    multiple of 16 is padded up to whole iterations and flagged.
    """
    if kc < 1:
        raise ValueError("kc must be >= 1")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    iters = -(-kc // UNROLL)
    padded = bool(kc % UNROLL)

    read_theo = iters * 2 * cm.ar_read64_cycles
    read_cal = iters * cm.ar_merged_iter_cycles
    mac_theo = iters * cm.macs_per_iter_cycles
    mac_cal = mac_theo + cm.loop_overhead_total

    if mode == "read_ar_only":
        theo, cal = read_theo, read_cal
    elif mode == "mac_only":
        theo, cal = mac_theo, mac_cal
    else:
        theo = iters * (2 * cm.ar_read64_cycles + cm.macs_per_iter_cycles)
        cal = max(read_cal, mac_cal) + cm.baseline_epilogue
    return CycleBreakdown(mode, kc, iters, int(round(theo)), int(round(cal)), padded)


def perf_per_tile(kc: int, tiles: int, cm: CostModel,
                  mr: int = 8, nr: int = 8) -> float:
    """Sustained MACs/cycle of one tile: kernel arithmetic over the
    calibrated kernel time plus the Cr round trip at this tile count."""
    macs = mr * nr * kc
    cycles = microkernel_cycles(kc, "baseline", cm).calibrated + cm.cr_copy_cycles(tiles)
    return macs / cycles


@dataclass
class EstimateReport:
    stream_bound: float        # inner-loop MACs over the unmerged Ar read cost
    reported_estimate: float   # the published 22.2 figure
    consistent: bool           # does the formula reproduce the published figure
    calibrated: float          # observed single-tile MACs/cycle
    note: str


def theoretical_estimate(cm: CostModel, mr: int = 8, nr: int = 8,
                         kc: int = 2048) -> EstimateReport:
    """Upper-level MACs/cycle bound from the Ar stream cost alone.

    With two 19-cycle 64-element reads per 1024-MAC iteration the bound
    is 1024/38 = 26.95; the published figure of 22.2 does not follow
    from those constants, so it is flagged rather than reproduced. The
    calibrated single-tile rate exceeds the bound because the two reads
    are merged into one long read.
    """
    if cm.ar_read64_cycles <= 0:
        raise ValueError("ar_read64_cycles must be positive for the estimate")
    macs_per_iter = mr * nr * UNROLL
    bound = macs_per_iter / (2 * cm.ar_read64_cycles)
    reported = 22.2
    return EstimateReport(
        stream_bound=bound,
        reported_estimate=reported,
        consistent=abs(bound - reported) < 0.05,
        calibrated=perf_per_tile(kc, 1, cm, mr, nr),
        note="merged long reads lift the observed rate above the two-read bound",
    )


@dataclass
class SimReport:
    tiles: int
    dims: tuple
    copy_cr_cycles: int        # per-tile total over the run
    arithmetic_cycles: int
    br_copy_cycles: int
    total_cycles: int
    macs_per_cycle_per_tile: float
    speedup: float
    efficiency: float
    imbalance: bool
    measured_total: int | None = None
    unmodeled_overlap: int | None = None


def simulate_run(dims: tuple, params, tiles: int, cm: CostModel) -> SimReport:
    """Per-tile cycle total for one strong-scaling point.

    Walks the outer blocks of the five-loop decomposition; each tile
    executes its share of L4 strips, paying one Br copy per strip and,
    per L5 iteration, the calibrated kernel time plus the Cr round trip.
    Indivisible strip counts are ceiled and flagged as imbalance. When
    the configuration matches the measured fixed-size experiment, the
    residual against the measured total is reported as unmodeled
    overlap.
    """
    if tiles < 1:
        raise ValueError("tiles must be >= 1")
    m, n, k = dims
    if m < 1 or n < 1 or k < 1:
        raise ValueError("dims must be >= 1")

    cr = cm.cr_copy_cycles(tiles)
    total = 0.0
    copy_cr = 0.0
    arith = 0.0
    br = 0.0
    imbalance = False
    for jc in range(0, n, params.nc):
        ncb = min(params.nc, n - jc)
        for pc in range(0, k, params.kc):
            kcb = min(params.kc, k - pc)
            mk = microkernel_cycles(kcb, "baseline", cm).calibrated
            for ic in range(0, m, params.mc):
                mcb = min(params.mc, m - ic)
                strips = -(-ncb // params.nr)
                if strips % tiles:
                    imbalance = True
                l4_per_tile = -(-strips // tiles)
                l5_iters = -(-mcb // params.mr)
                br += l4_per_tile * cm.br_copy_cycles
                arith += l4_per_tile * l5_iters * mk
                copy_cr += l4_per_tile * l5_iters * cr
                total += l4_per_tile * (cm.br_copy_cycles + l5_iters * (mk + cr))

    if tiles == 1:
        speedup = 1.0
    else:
        speedup = simulate_run(dims, params, 1, cm).total_cycles / total

    measured = None
    residual = None
    if (dims == MEASURED_PROBLEM
            and (params.mc, params.nc, params.kc) == MEASURED_PROBLEM
            and tiles in MEASURED_TOTALS):
        measured = MEASURED_TOTALS[tiles]
        residual = int(round(total)) - measured

    return SimReport(
        tiles=tiles,
        dims=tuple(dims),
        copy_cr_cycles=int(round(copy_cr)),
        arithmetic_cycles=int(round(arith)),
        br_copy_cycles=int(round(br)),
        total_cycles=int(round(total)),
        macs_per_cycle_per_tile=perf_per_tile(params.kc, tiles, cm,
                                              params.mr, params.nr),
        speedup=speedup,
        efficiency=speedup / tiles,
        imbalance=imbalance,
        measured_total=measured,
        unmodeled_overlap=residual,
    )
