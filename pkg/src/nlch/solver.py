"""Linear solves for ``(alpha*I + gamma*G*Lbar) x = b``.

``G`` is the mobility operator: ``L`` by default (mass conserving) or
``Lbar``.  Both factors are circulant, so the system is diagonal in Fourier
space; the production path still runs matrix-free conjugate gradients on
FFT-applied operators, with the exact diagonal inverse available as an
oracle (:func:`spectral_solve`), as a preconditioner, and a dense LU route
(:class:`DenseSolver`) for the direct-solver benchmark.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .operator import ShiftedOperator, apply_symbol

log = logging.getLogger(__name__)

MOBILITIES = ("L", "Lbar")
DENSE_MAX_UNKNOWNS = 12000


class SolverError(RuntimeError):
    def __init__(self, msg, residual=None, iterations=None):
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations


class DenseSizeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StepSystem:
    alpha: float
    gamma: float
    op: ShiftedOperator
    mobility: str = "L"
    _symbol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.alpha > 0 or self.gamma < 0:
            raise ValueError("need alpha > 0 and gamma >= 0")
        if self.mobility not in MOBILITIES:
            raise ValueError(f"mobility must be one of {MOBILITIES}")
        lam = self.op.table.symbol_half
        lam_bar = lam + self.op.shift
        lam_g = lam if self.mobility == "L" else lam_bar
        object.__setattr__(self, "_symbol", self.alpha + self.gamma * lam_g * lam_bar)

    @property
    def symbol(self) -> np.ndarray:
        """Eigenvalues in rfft2 layout (all >= alpha)."""
        return self._symbol

    def mobility_apply(self, x: np.ndarray) -> np.ndarray:
        if self.mobility == "L":
            return self.op.L(x)
        return self.op(x)


def apply_system(sys: StepSystem, x: np.ndarray) -> np.ndarray:
    return apply_symbol(sys.symbol, x)


def spectral_solve(sys: StepSystem, b: np.ndarray) -> np.ndarray:
    return np.fft.irfft2(np.fft.rfft2(b) / sys.symbol, s=b.shape)


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float  # relative, unpreconditioned
    history: list = field(default_factory=list)


def cg_solve(sys: StepSystem, b: np.ndarray, tol: float = 1e-12, maxit: int = 1000,
             x0: np.ndarray | None = None, precondition: bool = False) -> CGResult:
    """Conjugate gradients on the FFT-applied system.

    Stops when ``||A x - b|| <= tol * ||b||``; raises :class:`SolverError`
    after ``maxit`` iterations.  With ``precondition=True`` the exact
    spectral inverse is used as preconditioner.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return CGResult(np.zeros_like(b), 0, 0.0, [0.0])
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - apply_system(sys, x) if x0 is not None else b.copy()
    rnorm = np.linalg.norm(r)
    history = [rnorm / bnorm]
    if rnorm <= tol * bnorm:
        return CGResult(x, 0, history[-1], history)
    z = spectral_solve(sys, r) if precondition else r
    p = z.copy()
    rz = np.vdot(r, z)
    for it in range(1, maxit + 1):
        Ap = apply_system(sys, p)
        a = rz / np.vdot(p, Ap)
        x += a * p
        r -= a * Ap
        rnorm = np.linalg.norm(r)
        history.append(rnorm / bnorm)
        if rnorm <= tol * bnorm:
            # guard against drift of the recurrence residual
            true_res = np.linalg.norm(b - apply_system(sys, x)) / bnorm
            if true_res <= tol:
                return CGResult(x, it, true_res, history)
            r = b - apply_system(sys, x)
        z = spectral_solve(sys, r) if precondition else r
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = np.linalg.norm(b - apply_system(sys, x)) / bnorm
    raise SolverError(f"CG did not converge in {maxit} iterations (relative residual {res:.3e})",
                      residual=res, iterations=maxit)


def assemble_dense(sys: StepSystem) -> np.ndarray:
    """Dense ``n x n`` matrix, n = Nx*Ny, built column by column from apply_system.

    The operator is circulant so every column is a periodic shift of the
    response to the unit vector at node (0, 0).
    """
    g = sys.op.grid
    n = g.Nx * g.Ny
    if n > DENSE_MAX_UNKNOWNS:
        raise DenseSizeError(f"dense assembly of {n} unknowns exceeds the guard {DENSE_MAX_UNKNOWNS}")
    e0 = np.zeros(g.shape)
    e0[0, 0] = 1.0
    col0 = apply_system(sys, e0)
    A = np.empty((n, n), order="F")
    for i in range(g.Nx):
        shifted_rows = np.roll(col0, i, axis=0)
        for j in range(g.Ny):
            A[:, i * g.Ny + j] = np.roll(shifted_rows, j, axis=1).ravel()
    return A


class DenseSolver:
    """LU direct solver; the last ``keep`` factorizations are cached."""

    def __init__(self, keep: int = 2):
        self.keep = keep
        self._cache = {}

    def factor(self, sys: StepSystem):
        key = (sys.alpha, sys.gamma, sys.mobility, id(sys.op))
        if key not in self._cache:
            while len(self._cache) >= self.keep:
                self._cache.pop(next(iter(self._cache)))
            A = assemble_dense(sys)
            self._cache[key] = scipy.linalg.lu_factor(A, overwrite_a=True, check_finite=False)
            log.debug("dense LU of size %d", A.shape[0])
        return self._cache[key]

    def solve(self, sys: StepSystem, b: np.ndarray) -> np.ndarray:
        lu = self.factor(sys)
        return scipy.linalg.lu_solve(lu, b.ravel(), check_finite=False).reshape(b.shape)

    def clear(self):
        self._cache.clear()


def dense_solve(sys: StepSystem, b: np.ndarray) -> np.ndarray:
    return DenseSolver().solve(sys, b)
