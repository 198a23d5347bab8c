"""Memory-level descriptors, operand placement, footprint and reuse math.

Capacities default to the VCK190 levels: 2 KB of tile vector registers,
32 KB of tile local memory, 16.27 MB of Ultra RAM, 4.25 MB of Block RAM
and 2 GB of DDR. Fractional megabyte figures are resolved to bytes at
whole-KiB granularity under the binary convention (16.27 MB -> 16,660 KiB
= 17,059,840 B), or whole-KB under the decimal one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import TYPE_CHECKING

from .errors import CapacityError

if TYPE_CHECKING:  # pragma: no cover
    from .blocking import BlockingParams

LEVELS = ("registers", "local", "ultra", "block_ram", "ddr")

ACC_BYTES_PER_LANE = 6  # 48-bit accumulator lanes backing Cr


def mb_to_bytes(value: float, convention: str = "binary") -> int:
    if convention == "binary":
        return int(value * 1024) * 1024
    if convention == "decimal":
        return int(value * 1000) * 1000
    raise ValueError(f"unknown unit convention {convention!r}")


@dataclass
class MemorySpec:
    registers: int = 2 * 1024
    local: int = 32 * 1024
    ultra: int = mb_to_bytes(16.27)
    block_ram: int = mb_to_bytes(4.25)
    ddr: int = 2 * 1024 ** 3
    convention: str = "binary"

    def __post_init__(self):
        for level in LEVELS:
            if getattr(self, level) < 1:
                raise ValueError(f"{level} capacity must be strictly positive")
        if self.convention not in ("binary", "decimal"):
            raise ValueError(f"unknown unit convention {self.convention!r}")

    def capacity(self, level: str) -> int:
        if level not in LEVELS:
            raise ValueError(f"unknown memory level {level!r}")
        return getattr(self, level)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_PLACEMENT = {
    "Cr": "registers",
    "Br": "local",
    "Ac": "ultra",
    "Ar": "ultra",
    "Bc": "block_ram",
    "A": "ddr",
    "B": "ddr",
    "C": "ddr",
}


@dataclass
class PlacementMap:
    assignment: dict = field(default_factory=lambda: dict(DEFAULT_PLACEMENT))

    def __post_init__(self):
        missing = set(DEFAULT_PLACEMENT) - set(self.assignment)
        if missing:
            raise ValueError(f"placement missing operands: {sorted(missing)}")
        for operand, level in self.assignment.items():
            if level not in LEVELS:
                raise ValueError(f"operand {operand} placed at unknown level {level!r}")

    def level_of(self, operand: str) -> str:
        return self.assignment[operand]


@dataclass
class FootprintReport:
    br_mode: str
    usage: dict          # level -> bytes used by the blocked algorithm
    capacity: dict       # level -> bytes available
    over: list           # levels whose usage exceeds capacity

    @property
    def ok(self) -> bool:
        return not self.over


def validate_footprints(params: "BlockingParams", mem: MemorySpec,
                        br_mode: str = "stream", elem_bytes: int = 1,
                        local_reserve_bytes: int = 0) -> FootprintReport:
    """Per-level byte usage of one blocked subproblem.

    Under ``gmio`` the Br panel needs a same-size ping and pong buffer on
    top of the data itself (3x footprint); ``stream`` needs only the
    panel. Raises CapacityError (carrying the report) if any level
    overflows.
    """
    if br_mode not in ("gmio", "stream"):
        raise ValueError(f"unknown br_mode {br_mode!r}")
    br_bytes = params.kc * params.nr * elem_bytes
    usage = {
        "registers": params.mr * params.nr * ACC_BYTES_PER_LANE,
        "local": br_bytes * (3 if br_mode == "gmio" else 1) + local_reserve_bytes,
        "ultra": params.mc * params.kc * elem_bytes,
        "block_ram": params.kc * params.nc * elem_bytes,
    }
    capacity = {level: mem.capacity(level) for level in usage}
    over = [level for level in usage if usage[level] > capacity[level]]
    report = FootprintReport(br_mode, usage, capacity, over)
    if over:
        raise CapacityError(over, report)
    return report


@dataclass
class IntensityReport:
    ops_per_element: float   # 2*mr*nr*kc / (2*mr*nr + mr*kc + nr*kc)
    macs_per_ar_byte: float  # inner-loop MACs per A-panel byte streamed


def compute_to_comm_ratio(mr: int, nr: int, kc: int) -> IntensityReport:
    """Compute-to-communication ratio of one micro-kernel.

    The operations ratio counts 2 ops per MAC against every element of
    Cr (in and out), Ar, and Br touched by the kernel; the MACs-per-byte
    variant counts only the streamed Ar bytes, matching the inner-loop
    view (1024 MACs per 128 Ar bytes = 8 for the 8x8 kernel).
    """
    if mr < 1 or nr < 1 or kc < 0:
        raise ValueError("mr, nr must be positive and kc nonnegative")
    if kc == 0:
        return IntensityReport(0.0, 0.0)
    ops = 2 * mr * nr * kc / (2 * mr * nr + mr * kc + nr * kc)
    macs_per_ar_byte = (mr * nr * kc) / (mr * kc)
    return IntensityReport(ops, macs_per_ar_byte)


def reuse_factors(m: int, n: int, k: int, params: "BlockingParams") -> dict:
    """How often each staged operand is read per placement.

    Bc once per L3 iteration (m/mc), Ac once per L4 iteration (nc/nr),
    Br once per L5 iteration (mc/mr), Cr once per k-step of its
    micro-kernel (kc).
    """
    if m < 1 or n < 1 or k < 1:
        raise ValueError("dims must be >= 1")

    def ratio(a, b):
        return a // b if a % b == 0 else a / b

    return {
        "Bc": ratio(m, params.mc),
        "Ac": ratio(params.nc, params.nr),
        "Br": ratio(params.mc, params.mr),
        "Cr": params.kc,
    }
