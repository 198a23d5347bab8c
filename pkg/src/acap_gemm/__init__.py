"""Blocked UINT8 GEMM emulation and calibrated cycle model for a
multi-tile vector accelerator with a software-managed memory hierarchy."""

from .blocking import (
    BlockingParams,
    PackedA,
    PackedB,
    TransferLog,
    gemm_blocked,
    pack_A,
    pack_B,
    paper_ccp,
    select_ccp,
    unpack_A,
    unpack_B,
)
from .errors import CapacityError, ConfigError
from .matrix import Matrix, fill_random, new_matrix, reference_gemm
from .memory import (
    MemorySpec,
    PlacementMap,
    compute_to_comm_ratio,
    reuse_factors,
    validate_footprints,
)
from .microkernel import AccBank, KernelStats, MicroPanels, mac16_emulated, micro_kernel
from .simulator import (
    CostModel,
    SimReport,
    microkernel_cycles,
    perf_per_tile,
    simulate_run,
    theoretical_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "AccBank",
    "BlockingParams",
    "CapacityError",
    "ConfigError",
    "CostModel",
    "KernelStats",
    "Matrix",
    "MemorySpec",
    "MicroPanels",
    "PackedA",
    "PackedB",
    "PlacementMap",
    "SimReport",
    "TransferLog",
    "compute_to_comm_ratio",
    "fill_random",
    "gemm_blocked",
    "mac16_emulated",
    "micro_kernel",
    "microkernel_cycles",
    "new_matrix",
    "pack_A",
    "pack_B",
    "paper_ccp",
    "perf_per_tile",
    "reference_gemm",
    "reuse_factors",
    "select_ccp",
    "simulate_run",
    "theoretical_estimate",
    "unpack_A",
    "unpack_B",
    "validate_footprints",
]
