"""Partial-wave wave function (``m = 0``) and its binary checkpoint format.

Checkpoint layout (little endian)::

    magic       8 bytes   b"TSLITPWS"
    version     uint32    1
    l_max       uint32
    n_points    uint32
    reserved    uint32    0
    time        float64
    grid hash   32 bytes  sha256 of (order, element edges)
    coeffs      complex128[(l_max + 1) * n_points], row-major in (l, point)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import RadialGrid

MAGIC = b"TSLITPWS"
VERSION = 1
_HEADER = struct.Struct("<8sIIIId32s")


@dataclass
class PartialWaveState:
    """``psi = sum_l u_l(r)/r Y_l0``; ``coeffs[l, i] = sqrt(w_i) u_l(r_i)``."""

    grid: RadialGrid
    coeffs: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] != self.grid.size:
            raise ValueError("coeffs must have shape (l_max + 1, grid.size)")

    @classmethod
    def zeros(cls, grid: RadialGrid, l_max: int, time: float = 0.0) -> "PartialWaveState":
        return cls(grid, np.zeros((l_max + 1, grid.size), dtype=complex), time)

    @property
    def m(self) -> int:
        return 0

    @property
    def l_max(self) -> int:
        return self.coeffs.shape[0] - 1

    def norm(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def populations(self) -> np.ndarray:
        """Norm carried by each partial wave."""
        return np.sum(np.abs(self.coeffs) ** 2, axis=1)

    def radial(self, l: int) -> np.ndarray:
        """``u_l(r)`` sampled at the grid points."""
        return self.grid.to_values(self.coeffs[l])

    def copy(self) -> "PartialWaveState":
        return PartialWaveState(self.grid, self.coeffs.copy(), self.time, dict(self.meta))

    def with_l_max(self, l_max: int) -> "PartialWaveState":
        """Copy truncated or zero-padded to ``l_max``."""
        out = np.zeros((l_max + 1, self.grid.size), dtype=complex)
        keep = min(l_max, self.l_max) + 1
        out[:keep] = self.coeffs[:keep]
        return PartialWaveState(self.grid, out, self.time, dict(self.meta))

    def overlap(self, other: "PartialWaveState") -> complex:
        keep = min(self.l_max, other.l_max) + 1
        return complex(np.vdot(self.coeffs[:keep], other.coeffs[:keep]))

    def expectation_r(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2 * self.grid.points[None, :]) / self.norm())

    def save(self, path) -> None:
        save_checkpoint(self, path)


def save_checkpoint(state: PartialWaveState, path) -> None:
    header = _HEADER.pack(
        MAGIC, VERSION, state.l_max, state.grid.size, 0, float(state.time), state.grid.fingerprint
    )
    data = np.ascontiguousarray(state.coeffs, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def load_checkpoint(path, grid: RadialGrid) -> PartialWaveState:
    """Read a checkpoint written by :func:`save_checkpoint` for the same grid."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated checkpoint header")
    magic, version, l_max, n_points, _, time, digest = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError("not a partial-wave checkpoint")
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    if digest != grid.fingerprint or n_points != grid.size:
        raise ValueError("checkpoint was written for a different radial grid")
    count = (l_max + 1) * n_points
    if len(raw) < _HEADER.size + 16 * count:
        raise ValueError("truncated checkpoint body")
    body = np.frombuffer(raw, dtype="<c16", count=count, offset=_HEADER.size)
    return PartialWaveState(grid, body.reshape(l_max + 1, n_points).astype(complex), time)
