"""Double-well potential, discrete energy and the exponential SAV variable."""
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .grid import inner_product
from .operator import ShiftedOperator, apply_shifted


class StabilityError(RuntimeError):
    """A quantity that must be non-increasing or non-negative was not."""


class SavConfigError(ValueError):
    """The auxiliary variable cannot be formed with the given scaling."""


@dataclass(frozen=True)
class PotentialSpec:
    """Shifted double well ``(v^2 - 1 - beta)^2 / 4`` plus mobility and eps^2."""

    beta: float = 0.0
    eps2: float = 0.1
    M: float = 1.0

    def __post_init__(self):
        if self.beta < 0 or not self.eps2 > 0 or not self.M > 0:
            raise ValueError("need beta >= 0, eps2 > 0, M > 0")

    def operator(self, table) -> ShiftedOperator:
        return ShiftedOperator(table, self.beta, self.eps2)


def double_well(p: PotentialSpec, v):
    u = np.square(v) - 1.0 - p.beta
    return 0.25 * u * u


def dwell_deriv(p: PotentialSpec, v):
    if np.ndim(v) == 2:
        return _kernels.dwell_deriv_field(v, p.beta)
    v = np.asarray(v, dtype=float)
    out = v**3 - (1.0 + p.beta) * v
    return float(out) if out.ndim == 0 else out


def discrete_energy(phi: np.ndarray, op: ShiftedOperator, p: PotentialSpec) -> float:
    """``hx*hy*sum(Fbar(phi)) + eps2/2 * (Lbar phi, phi)``."""
    g = op.grid
    bulk = g.cell_area * _kernels.dwell_sum(phi, p.beta)
    return bulk + 0.5 * p.eps2 * inner_product(g, apply_shifted(op, phi), phi)


def chemical_potential_bar(phi: np.ndarray, op: ShiftedOperator, p: PotentialSpec) -> np.ndarray:
    """Explicit chemical potential ``eps2*Lbar(phi) + fbar(phi)`` (beta-invariant)."""
    return p.eps2 * apply_shifted(op, phi) + dwell_deriv(p, phi)


def dissipation_rate(mu_bar: np.ndarray, op: ShiftedOperator, p: PotentialSpec, mobility: str = "L") -> float:
    """``M * (G mu, mu)`` with G the mobility operator (``L`` or ``Lbar``)."""
    g = op.grid
    G_mu = op.L(mu_bar) if mobility == "L" else apply_shifted(op, mu_bar)
    return p.M * inner_product(g, G_mu, mu_bar)


@dataclass(frozen=True)
class SavState:
    R: float
    C: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise StabilityError(f"auxiliary variable must stay positive, got R={self.R}")
        if not self.C > 0:
            raise ValueError("scaling constant C must be positive")

    @property
    def modified_energy(self) -> float:
        return self.C * math.log(self.R)


def default_C(E0: float) -> float:
    return max(1.0, abs(E0))


def initial_sav(E0: float, C: float | None = None) -> SavState:
    """``R0 = exp(E0/C)``; ``C`` defaults to ``max(1, |E0|)``."""
    if C is None:
        C = default_C(E0)
    if E0 / C > 700.0:
        raise SavConfigError(f"exp(E/C) overflows for E={E0:g}, C={C:g}; increase C")
    return SavState(math.exp(E0 / C), C)


# D may dip below zero by roundoff only
PSD_TOL = 1e-10


def update_R(s: SavState, D: float, dt: float, scale: float = 1.0) -> SavState:
    """``R_new = R / (1 + dt*D/C)``; ``scale`` bounds the roundoff slack on D."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if D < -PSD_TOL * max(scale, 1.0):
        raise StabilityError(f"negative dissipation D={D:g}: operator is not positive semi-definite")
    D = max(D, 0.0)
    return replace(s, R=s.R / (1.0 + dt * D / s.C))


def xi(s: SavState, E_star: float) -> float:
    """``R / exp(E*/C)``; evaluated as ``R*exp(-E*/C)`` which cannot overflow for E* >= 0."""
    if not math.isfinite(E_star):
        raise SavConfigError("predictor energy is not finite")
    if -E_star / s.C > 700.0:
        raise SavConfigError(f"exp(E/C) underflow for E={E_star:g}, C={s.C:g}; increase C")
    return s.R * math.exp(-E_star / s.C)


def v_poly(order: int, x: float):
    """Order-matching factor: xi, xi(2-xi), xi(3-3xi+xi^2), xi(2-xi)(2-2xi+xi^2)."""
    if order == 1:
        return x
    if order == 2:
        return x * (2.0 - x)
    if order == 3:
        return x * (3.0 - 3.0 * x + x * x)
    if order == 4:
        return x * (2.0 - x) * (2.0 - 2.0 * x + x * x)
    raise ValueError(f"V polynomial order must be 1..4, got {order}")
