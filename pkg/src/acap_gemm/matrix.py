"""Dense integer matrices and the exact GEMM ground truth.

Matrices are row-major numpy arrays: uint8 for the A/B operands of the
quantized product, int32 for the C accumulator. ``reference_gemm`` is the
oracle every blocked path is checked against bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_DTYPES = {"u8": np.uint8, "i32": np.int32}

_MASK64 = (1 << 64) - 1
# Substitute state for seed == 0 (xorshift must not start from zero).
_ZERO_SEED_STATE = 0x9E3779B97F4A7C15


def _xorshift64(state: int) -> int:
    # Marsaglia xorshift64, shift triple (13, 7, 17).
    state ^= (state << 13) & _MASK64
    state ^= state >> 7
    state ^= (state << 17) & _MASK64
    return state


@dataclass
class Matrix:
    rows: int
    cols: int
    elem_kind: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"matrix dimensions must be >= 1, got {self.rows}x{self.cols}")
        if self.elem_kind not in _DTYPES:
            raise ValueError(f"unknown element kind {self.elem_kind!r}")
        if self.data.shape != (self.rows, self.cols):
            raise ValueError("data shape does not match rows x cols")
        if self.data.dtype != _DTYPES[self.elem_kind]:
            raise ValueError(f"dtype {self.data.dtype} does not match kind {self.elem_kind}")

    @property
    def shape(self):
        return (self.rows, self.cols)

    def copy(self) -> "Matrix":
        return Matrix(self.rows, self.cols, self.elem_kind, self.data.copy())


def new_matrix(rows: int, cols: int, kind: str = "u8") -> Matrix:
    """Zero-initialized ``rows`` x ``cols`` matrix of the given element kind."""
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be >= 1, got {rows}x{cols}")
    if kind not in _DTYPES:
        raise ValueError(f"unknown element kind {kind!r}")
    return Matrix(rows, cols, kind, np.zeros((rows, cols), dtype=_DTYPES[kind]))


def fill_random(m: Matrix, seed: int) -> Matrix:
    """Fill a u8 matrix from a platform-independent xorshift64 stream.

    Each element is the low byte of the next generator state, so the same
    seed reproduces the same matrix everywhere. Returns ``m`` filled in
    place.
    """
    if m.elem_kind != "u8":
        raise ValueError("fill_random only defined for u8 matrices")
    state = seed & _MASK64
    if state == 0:
        state = _ZERO_SEED_STATE
    out = np.empty(m.rows * m.cols, dtype=np.uint8)
    buf = out.tolist()
    for i in range(len(buf)):
        state = _xorshift64(state)
        buf[i] = state & 0xFF
    m.data[:, :] = np.array(buf, dtype=np.uint8).reshape(m.rows, m.cols)
    return m


def wrap_i32(x: np.ndarray) -> np.ndarray:
    """Two's-complement wrap of a wide integer array to int32."""
    return ((x.astype(np.int64) + (1 << 31)) % (1 << 32) - (1 << 31)).astype(np.int32)


def reference_gemm(C: Matrix, A: Matrix, B: Matrix) -> Matrix:
    """C += A @ B, exactly.

    Accumulation is exact in 64-bit intermediates (wider than the 48-bit
    accumulators of the emulated kernel); the final store wraps to int32
    two's-complement. Serves as the ground truth for every blocked path.
    """
    if A.elem_kind != "u8" or B.elem_kind != "u8" or C.elem_kind != "i32":
        raise ValueError("reference_gemm expects u8 A/B and i32 C")
    m, k = A.shape
    k2, n = B.shape
    if k != k2 or C.shape != (m, n):
        raise ValueError(
            f"shape mismatch: A {A.shape}, B {B.shape}, C {C.shape}"
        )
    acc = A.data.astype(np.int64) @ B.data.astype(np.int64)
    C.data[:, :] = wrap_i32(C.data.astype(np.int64) + acc)
    return C


def checksum(m: Matrix) -> int:
    """CRC32 of the row-major bytes, for report provenance."""
    import zlib

    return zlib.crc32(np.ascontiguousarray(m.data).tobytes()) & 0xFFFFFFFF
