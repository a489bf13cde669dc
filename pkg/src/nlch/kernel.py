"""Gaussian interaction kernel and its periodic sampling on a grid."""
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import periodic_gauss_1d
from .grid import GridSpec


@dataclass(frozen=True)
class GaussianKernel:
    """``J(x) = 4 / (pi^{d/2} delta^{d+2}) * exp(-|x|^2/delta^2)`` with d = 2."""

    delta: float
    dim: int = 2

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"kernel width delta must be positive, got {self.delta}")
        if self.dim != 2:
            raise ValueError("only the 2D kernel is supported")

    @property
    def peak(self) -> float:
        return 4.0 / (math.pi ** (self.dim / 2) * self.delta ** (self.dim + 2))

    @property
    def mass(self) -> float:
        """Integral over the whole plane, 4/delta^2."""
        return 4.0 / self.delta**2


def kernel_eval(k: GaussianKernel, x, y):
    """Closed-form (non-periodic) kernel value; broadcasts over arrays."""
    r2 = np.square(x) + np.square(y)
    out = k.peak * np.exp(-r2 / k.delta**2)
    return float(out) if np.ndim(out) == 0 else out


def wrapped_offsets(n: int, h: float) -> np.ndarray:
    """Offsets ``p*h`` folded into the fundamental cell ``[-n*h/2, n*h/2]``."""
    p = np.arange(n)
    return np.where(p <= n // 2, p, p - n) * h


@dataclass(frozen=True, eq=False)
class KernelTable:
    grid: GridSpec
    kernel: GaussianKernel
    samples: np.ndarray
    jstar1: float
    symbol: np.ndarray  # full (Nx, Ny) eigenvalues of L_h
    symbol_half: np.ndarray = field(repr=False)  # rfft2 layout, (Nx, Ny//2+1)

    @property
    def delta(self) -> float:
        return self.kernel.delta

    def second_moment(self) -> float:
        g = self.grid
        ox = wrapped_offsets(g.Nx, g.hx)[:, None]
        oy = wrapped_offsets(g.Ny, g.hy)[None, :]
        return g.cell_area * float(np.sum(self.samples * (ox**2 + oy**2)))


def build_table(grid: GridSpec, k: GaussianKernel) -> KernelTable:
    """Sample the periodised kernel on the grid and diagonalise L_h.

    The Gaussian is made ``Omega``-periodic by summing its images, so the
    table is the exact circulant of the closed-grid trapezoidal sums.
    """
    ox = wrapped_offsets(grid.Nx, grid.hx)
    oy = wrapped_offsets(grid.Ny, grid.hy)
    gx = periodic_gauss_1d(ox, grid.Lx, k.delta)
    gy = periodic_gauss_1d(oy, grid.Ly, k.delta)
    samples = k.peak * np.outer(gx, gy)
    # enforce the index-negation symmetry so the transform is real
    neg = samples[(-np.arange(grid.Nx)) % grid.Nx][:, (-np.arange(grid.Ny)) % grid.Ny]
    samples = 0.5 * (samples + neg)
    samples.setflags(write=False)

    weighted = grid.cell_area * samples
    jstar1 = float(np.sum(weighted))
    symbol = jstar1 - np.fft.fft2(weighted).real
    symbol_half = jstar1 - np.fft.rfft2(weighted).real
    # L_h annihilates constants exactly
    symbol[0, 0] = 0.0
    symbol_half[0, 0] = 0.0
    symbol.setflags(write=False)
    symbol_half.setflags(write=False)
    return KernelTable(grid, k, samples, jstar1, symbol, symbol_half)
