"""Discrete nonlocal diffusion operator L_h and its beta-shifted form.

Two routes: :func:`apply_L_direct` evaluates the closed-grid trapezoidal
sums term by term (O(N^4), used as the correctness oracle and by nothing
on the hot path) and :func:`apply_L_fast` multiplies by the circulant
symbol in Fourier space.
"""
from dataclasses import dataclass

import numpy as np

from ._kernels import direct_trapezoid
from .grid import GridMismatchError, GridSpec
from .kernel import GaussianKernel, KernelTable


def apply_L_direct(grid: GridSpec, phi: np.ndarray, k: GaussianKernel) -> np.ndarray:
    grid.check(phi)
    x = -grid.Lx + grid.hx * np.arange(grid.Nx + 1)
    y = -grid.Ly + grid.hy * np.arange(grid.Ny + 1)
    return direct_trapezoid(phi, x, y, grid.Lx, grid.Ly, k.delta, k.peak)


def apply_symbol(symbol_half: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Multiply ``phi`` by a real circulant symbol given in rfft2 layout."""
    return np.fft.irfft2(np.fft.rfft2(phi) * symbol_half, s=phi.shape)


def apply_L_fast(phi: np.ndarray, table: KernelTable) -> np.ndarray:
    if np.shape(phi) != table.grid.shape:
        raise GridMismatchError(f"field shape {np.shape(phi)} does not match table grid {table.grid.shape}")
    return apply_symbol(table.symbol_half, phi)


@dataclass(frozen=True, eq=False)
class ShiftedOperator:
    """``Lbar = L + beta/eps2``: symmetric positive (semi-)definite."""

    table: KernelTable
    beta: float = 0.0
    eps2: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if not self.eps2 > 0:
            raise ValueError("eps2 must be positive")

    @property
    def grid(self) -> GridSpec:
        return self.table.grid

    @property
    def shift(self) -> float:
        return self.beta / self.eps2

    @property
    def symbol_half(self) -> np.ndarray:
        return self.table.symbol_half + self.shift

    def L(self, phi: np.ndarray) -> np.ndarray:
        return apply_L_fast(phi, self.table)

    def __call__(self, phi: np.ndarray) -> np.ndarray:
        return apply_shifted(self, phi)


def apply_shifted(op: ShiftedOperator, phi: np.ndarray) -> np.ndarray:
    out = apply_L_fast(phi, op.table)
    if op.shift:
        out += op.shift * phi
    return out
