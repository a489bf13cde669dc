"""Periodic 2D grid geometry and weighted discrete reductions.

Fields are plain ``(Nx, Ny)`` float arrays; node ``(i, j)`` sits at
``(-Lx + i*hx, -Ly + j*hy)``.  The duplicated boundary row/column of the
closed ``(N+1)``-point grid is not stored: under periodicity the trapezoidal
weights collapse to the uniform cell area ``hx*hy``.
"""
from dataclasses import dataclass

import numpy as np


class GridMismatchError(ValueError):
    """Raised when fields from different grids are combined."""


@dataclass(frozen=True)
class GridSpec:
    Lx: float
    Ly: float
    Nx: int
    Ny: int

    def __post_init__(self):
        if self.Lx <= 0 or self.Ly <= 0:
            raise ValueError("half-widths Lx, Ly must be positive")
        for n in (self.Nx, self.Ny):
            if int(n) != n or n < 4 or n % 2:
                raise ValueError(f"cell counts must be even integers >= 4, got {n}")

    @classmethod
    def square(cls, N: int, L: float = 1.0) -> "GridSpec":
        return cls(L, L, N, N)

    @property
    def hx(self) -> float:
        return 2.0 * self.Lx / self.Nx

    @property
    def hy(self) -> float:
        return 2.0 * self.Ly / self.Ny

    @property
    def shape(self) -> tuple:
        return (self.Nx, self.Ny)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def area(self) -> float:
        return 4.0 * self.Lx * self.Ly

    @property
    def x(self) -> np.ndarray:
        return -self.Lx + self.hx * np.arange(self.Nx)

    @property
    def y(self) -> np.ndarray:
        return -self.Ly + self.hy * np.arange(self.Ny)

    def mesh(self):
        """Node coordinates as two ``(Nx, Ny)`` arrays (``ij`` indexing)."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def check(self, *fields: np.ndarray) -> None:
        for f in fields:
            if np.shape(f) != self.shape:
                raise GridMismatchError(f"field shape {np.shape(f)} does not match grid {self.shape}")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def constant(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))


def inner_product(grid: GridSpec, a: np.ndarray, b: np.ndarray) -> float:
    """Cell-area weighted inner product ``hx*hy*sum(a*b)``."""
    grid.check(a, b)
    return grid.cell_area * float(np.vdot(a, b))


def l2_norm(grid: GridSpec, a: np.ndarray) -> float:
    return float(np.sqrt(inner_product(grid, a, a)))


def mean(grid: GridSpec, a: np.ndarray) -> float:
    grid.check(a)
    return float(np.mean(a))
