"""Exponential-SAV time stepping: BDF1, Crank-Nicolson, BDF2/3/4.

Every step follows the same recipe:

1. explicit chemical potential ``mu_bar`` at the predictor ``phi*``;
2. ``R`` update ``R/(1 + dt*M*(G mu_bar, mu_bar)/C)``;
3. one SPD solve ``(gamma_k/dt + M*eps2*G*Lbar) phi = rhs`` with the
   nonlinear term ``V_k(xi) * fbar(phi*)`` explicit.

``G`` is the mobility operator, ``L`` unless ``mobility="Lbar"``.
"""
import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .energy import (PotentialSpec, SavState, StabilityError, dissipation_rate, initial_sav,
                     update_R, v_poly, xi)
from .grid import GridSpec, inner_product, l2_norm
from .kernel import GaussianKernel, build_table
from .solver import DenseSolver, StepSystem, cg_solve, spectral_solve

log = logging.getLogger(__name__)

SCHEMES = ("BDF1", "CN", "BDF2", "BDF3", "BDF4")
ORDER = {"BDF1": 1, "CN": 2, "BDF2": 2, "BDF3": 3, "BDF4": 4}
SOLVERS = ("fs", "ds", "spectral")

# implicit coefficient and explicit history weights of (sum_j c_j phi^{n+1-j}) / dt
BDF_GAMMA = {1: 1.0, 2: 1.5, 3: 11.0 / 6.0, 4: 25.0 / 12.0}
BDF_HISTORY = {
    1: (1.0,),
    2: (2.0, -0.5),
    3: (3.0, -1.5, 1.0 / 3.0),
    4: (4.0, -3.0, 4.0 / 3.0, -0.25),
}
# explicit extrapolations of phi(t^{n+1})
EXTRAPOLATION = {
    1: (1.0,),
    2: (2.0, -1.0),
    3: (3.0, -3.0, 1.0),
    4: (4.0, -6.0, 4.0, -1.0),
}
CN_EXTRAPOLATION = (1.5, -0.5)

R_MONOTONE_TOL = 1e-12


class StartupRequiredError(ValueError):
    """Not enough history for the requested multistep formula."""


@dataclass
class SchemeConfig:
    scheme: str = "BDF1"
    M: float = 1.0
    eps2: float = 0.1
    delta: float = math.sqrt(0.1)
    beta: float = 0.0
    C: float | None = None
    dt: float = 0.05 / 8
    T: float = 0.05
    cg_tol: float = 1e-12
    cg_maxit: int = 1000
    seed: int = 0
    solver: str = "fs"
    precondition: bool = False
    mobility: str = "L"
    startup_substeps: int | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not (self.M > 0 and self.eps2 > 0 and self.delta > 0) or self.beta < 0:
            raise ValueError("need M, eps2, delta > 0 and beta >= 0")

    @property
    def order(self) -> int:
        return ORDER[self.scheme]


@dataclass
class History:
    """Newest-first fields ``[phi^n, phi^{n-1}, ...]`` plus the SAV state."""

    phis: list
    sav: SavState
    n: int = 0
    t: float = 0.0
    half: np.ndarray | None = None  # CN start value phi^{*,1/2}
    startup_steps: int = 0

    @property
    def phi(self) -> np.ndarray:
        return self.phis[0]

    def push(self, phi, sav, dt, keep):
        return replace(self, phis=[phi] + self.phis[: keep - 1], sav=sav, n=self.n + 1, t=self.t + dt,
                       half=None)


def predictor(order: int, h: History, half_step: bool = False) -> np.ndarray:
    """Explicit extrapolation of phi at t^{n+1} (or t^{n+1/2} with ``half_step``)."""
    coefs = CN_EXTRAPOLATION if half_step else EXTRAPOLATION[order]
    if len(h.phis) < len(coefs):
        raise StartupRequiredError(f"predictor needs {len(coefs)} history fields, have {len(h.phis)}")
    out = coefs[0] * h.phis[0]
    for c, phi in zip(coefs[1:], h.phis[1:]):
        out = out + c * phi
    return out


@dataclass
class StepInfo:
    D: float = 0.0
    xi: float = 1.0
    cg_iterations: int = 0


class Integrator:
    """Owns the kernel table, operators and linear solver for one simulation."""

    def __init__(self, grid: GridSpec, cfg: SchemeConfig, table=None):
        self.grid = grid
        self.cfg = cfg
        self.table = table if table is not None else build_table(grid, GaussianKernel(cfg.delta))
        self.pot = PotentialSpec(cfg.beta, cfg.eps2, cfg.M)
        self.op = self.pot.operator(self.table)
        self._systems = {}
        self._dense = DenseSolver() if cfg.solver == "ds" else None
        self.info = StepInfo()
        self.cg_iterations = []
        # roundoff scale for the PSD check on D
        self._lam_max = float(self.table.symbol.max()) + self.op.shift

    # -- building blocks -------------------------------------------------

    def G(self, x):
        return self.op.L(x) if self.cfg.mobility == "L" else self.op(x)

    def system(self, alpha: float, gamma: float) -> StepSystem:
        key = (alpha, gamma)
        if key not in self._systems:
            self._systems[key] = StepSystem(alpha, gamma, self.op, self.cfg.mobility)
        return self._systems[key]

    def solve(self, sys: StepSystem, b: np.ndarray, x0: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        if cfg.solver == "fs":
            res = cg_solve(sys, b, cfg.cg_tol, cfg.cg_maxit, x0=x0, precondition=cfg.precondition)
            self.info.cg_iterations = res.iterations
            self.cg_iterations.append(res.iterations)
            return res.x
        self.info.cg_iterations = 0
        if cfg.solver == "ds":
            return self._dense.solve(sys, b)
        return spectral_solve(sys, b)

    def energy_and_mu(self, phi):
        """Original energy and explicit chemical potential from one operator application."""
        p = self.pot
        Lbar_phi = self.op(phi)
        E = self.grid.cell_area * _kernels.dwell_sum(phi, p.beta) + 0.5 * p.eps2 * inner_product(self.grid, Lbar_phi, phi)
        mu = p.eps2 * Lbar_phi + _kernels.dwell_deriv_field(phi, p.beta)
        return E, mu

    def energy(self, phi) -> float:
        return self.energy_and_mu(phi)[0]

    def fbar(self, phi):
        return _kernels.dwell_deriv_field(phi, self.pot.beta)

    def initial_state(self, phi0) -> History:
        self.grid.check(phi0)
        return History([np.array(phi0, dtype=float)], initial_sav(self.energy(phi0), self.cfg.C))

    def _sav_stage(self, sav: SavState, phi_star, dt, order):
        """Steps (i)-(ii): R^{n+1} from mu_bar(phi*), then V(xi^{n+1})."""
        E_star, mu_bar = self.energy_and_mu(phi_star)
        D = dissipation_rate(mu_bar, self.op, self.pot, self.cfg.mobility)
        scale = self.pot.M * self._lam_max * inner_product(self.grid, mu_bar, mu_bar)
        sav_new = update_R(sav, D, dt, scale)
        x = xi(sav_new, E_star)
        self.info = StepInfo(D=D, xi=x)
        return sav_new, v_poly(order, x)

    # -- schemes ---------------------------------------------------------

    def step_bdfk(self, k: int, h: History, dt: float | None = None):
        dt = self.cfg.dt if dt is None else dt
        if len(h.phis) < k:
            raise StartupRequiredError(f"BDF{k} needs {k} history fields, have {len(h.phis)}")
        phi_star = predictor(k, h)
        sav, V = self._sav_stage(h.sav, phi_star, dt, k)
        p = self.pot
        rhs = BDF_HISTORY[k][0] * h.phis[0]
        for c, phi in zip(BDF_HISTORY[k][1:], h.phis[1:]):
            rhs = rhs + c * phi
        rhs = rhs / dt - p.M * self.G(V * self.fbar(phi_star))
        sys = self.system(BDF_GAMMA[k] / dt, p.M * p.eps2)
        return self.solve(sys, rhs, h.phi), sav

    def step_bdf1(self, h: History, dt: float | None = None):
        return self.step_bdfk(1, h, dt)

    def cn_startup(self, phi0, dt: float | None = None):
        """phi^{*,1/2} from one implicit half step with f frozen at phi0."""
        dt = self.cfg.dt if dt is None else dt
        p = self.pot
        rhs = 2.0 * phi0 / dt - p.M * self.G(self.fbar(phi0))
        return self.solve(self.system(2.0 / dt, p.M * p.eps2), rhs, phi0)

    def step_cn(self, h: History, dt: float | None = None):
        dt = self.cfg.dt if dt is None else dt
        if len(h.phis) >= 2:
            phi_star = predictor(2, h, half_step=True)
        else:
            phi_star = h.half if h.half is not None else self.cn_startup(h.phi, dt)
        sav, V = self._sav_stage(h.sav, phi_star, dt, 2)
        p = self.pot
        phi_n = h.phi
        rhs = phi_n / dt - p.M * self.G(0.5 * p.eps2 * self.op(phi_n) + V * self.fbar(phi_star))
        sys = self.system(1.0 / dt, 0.5 * p.M * p.eps2)
        return self.solve(sys, rhs, phi_n), sav

    def step(self, h: History, dt: float | None = None, scheme: str | None = None):
        scheme = scheme or self.cfg.scheme
        if scheme == "CN":
            return self.step_cn(h, dt)
        return self.step_bdfk(ORDER[scheme], h, dt)

    def advance(self, h: History, dt: float | None = None, scheme: str | None = None) -> History:
        dt = self.cfg.dt if dt is None else dt
        scheme = scheme or self.cfg.scheme
        phi, sav = self.step(h, dt, scheme)
        if sav.R > h.sav.R * (1.0 + R_MONOTONE_TOL):
            raise StabilityError(f"R increased at step {h.n + 1}: {h.sav.R!r} -> {sav.R!r}")
        return h.push(phi, sav, dt, max(ORDER[scheme], 2 if scheme == "CN" else 1))

    # -- startup ---------------------------------------------------------

    def startup_substeps(self, dt: float) -> int:
        """CN sub-steps per macro step used to start BDF4.

        CN over an O(dt) interval with sub-step h errs by O(dt*h^2);
        h = dt^{3/2} keeps the start values O(dt^4).
        """
        if self.cfg.startup_substeps is not None:
            return max(1, int(self.cfg.startup_substeps))
        return max(1, math.ceil(dt ** -0.5))

    def bootstrap(self, phi0, dt: float | None = None, on_step=None) -> History:
        """History holding the start values the configured scheme needs.

        BDF2 starts from one BDF1 step, BDF3 from two CN steps and BDF4 from
        three macro steps of sub-stepped CN, so each start value carries an
        error of the scheme's own order.  ``on_step(history)`` is called for
        every intermediate macro step.
        """
        dt = self.cfg.dt if dt is None else dt
        k = self.cfg.order if self.cfg.scheme != "CN" else 1
        h = self.initial_state(phi0)
        if k == 1:
            return h
        phis = [h.phi]
        if k == 2:
            sub, scheme = 1, "BDF1"
        else:
            sub, scheme = (1 if k == 3 else self.startup_substeps(dt)), "CN"
        hs = dt / sub
        inner = h
        for _ in range(k - 1):
            for _ in range(sub):
                inner = self.advance(inner, hs, scheme)
            phis.insert(0, inner.phi)
            if on_step is not None:
                on_step(History(list(phis), inner.sav, len(phis) - 1, (len(phis) - 1) * dt))
        return History(phis, inner.sav, k - 1, (k - 1) * dt, startup_steps=k - 1)


@dataclass
class SimulationRecord:
    rows: list = field(default_factory=list)  # (step, t, E, C ln R, R, xi, D)
    snapshots: dict = field(default_factory=dict)
    phi: np.ndarray | None = None
    t: float = 0.0
    steps: int = 0
    steady_time: float | None = None
    wall_time: float = 0.0
    cg_iterations: list = field(default_factory=list)
    masses: list = field(default_factory=list)
    C: float = 1.0

    ENERGY_COLUMNS = ("step", "t", "E_original", "E_modified", "R", "xi", "D")

    @property
    def energies(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    @property
    def modified_energies(self) -> np.ndarray:
        return np.array([r[3] for r in self.rows])

    @property
    def R(self) -> np.ndarray:
        return np.array([r[4] for r in self.rows])


def run(grid: GridSpec, cfg: SchemeConfig, phi0: np.ndarray, stop: str = "final_time",
        snapshots=(), steady_tol: float = 1e-8, t_max: float | None = None,
        integrator: Integrator | None = None, progress=None, steady_window: int = 1) -> SimulationRecord:
    """Advance ``phi0`` with the configured scheme.

    ``stop="final_time"`` runs ``round(T/dt)`` steps; ``stop="steady"`` stops
    once consecutive original energies differ by less than ``steady_tol``
    on ``steady_window`` successive steps (or at ``t_max``, default ``T``).
    """
    if steady_window < 1:
        raise ValueError("steady_window must be >= 1")
    if stop not in ("final_time", "steady"):
        raise ValueError("stop must be 'final_time' or 'steady'")
    integ = integrator or Integrator(grid, cfg)
    dt = cfg.dt
    t_end = cfg.T if (stop == "final_time" or t_max is None) else t_max
    nsteps = int(round(t_end / dt))
    pending = sorted(float(s) for s in snapshots)
    rec = SimulationRecord()
    t0 = time.perf_counter()

    def record(h: History):
        E = integ.energy(h.phi)
        rec.rows.append((h.n, h.n * dt, E, h.sav.modified_energy, h.sav.R, integ.info.xi, integ.info.D))
        rec.masses.append(float(np.mean(h.phi)))
        while pending and pending[0] <= h.n * dt + 0.5 * dt:
            rec.snapshots[pending.pop(0)] = h.phi.copy()
        return E

    h0 = integ.initial_state(phi0)
    rec.C = h0.sav.C
    integ.info = StepInfo()
    record(h0)
    h = integ.bootstrap(phi0, on_step=record)
    E_prev = rec.rows[-1][2]
    quiet = 0
    while h.n < nsteps:
        h = integ.advance(h)
        E = record(h)
        if progress is not None:
            progress(h)
        quiet = quiet + 1 if abs(E - E_prev) < steady_tol else 0
        if stop == "steady" and quiet >= steady_window:
            rec.steady_time = h.n * dt
            break
        E_prev = E
    rec.phi = h.phi
    rec.t = h.n * dt
    rec.steps = h.n
    rec.wall_time = time.perf_counter() - t0
    rec.cg_iterations = list(integ.cg_iterations)
    return rec
