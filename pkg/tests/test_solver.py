import math

import numpy as np
import pytest

from nlch.grid import GridSpec
from nlch.kernel import GaussianKernel, build_table
from nlch.operator import ShiftedOperator
from nlch.solver import (DENSE_MAX_UNKNOWNS, DenseSizeError, DenseSolver, SolverError, StepSystem,
                         apply_system, assemble_dense, cg_solve, dense_solve, spectral_solve)


def make_op(N, delta=0.3, beta=0.0, eps2=0.1):
    g = GridSpec.square(N)
    return ShiftedOperator(build_table(g, GaussianKernel(delta)), beta, eps2)


def dense_from_samples(op, alpha, gamma, mobility):
    """Independent matrix: circulant entries straight from the kernel samples."""
    t = op.table
    g = t.grid
    n = g.Nx * g.Ny
    idx = np.arange(n)
    i, j = np.divmod(idx, g.Ny)
    di = (i[:, None] - i[None, :]) % g.Nx
    dj = (j[:, None] - j[None, :]) % g.Ny
    L = t.jstar1 * np.eye(n) - g.cell_area * t.samples[di, dj]
    Lbar = L + op.shift * np.eye(n)
    G = L if mobility == "L" else Lbar
    return alpha * np.eye(n) + gamma * G @ Lbar


@pytest.mark.parametrize("mobility", ["L", "Lbar"])
def test_constant_in_kernel(mobility):
    op = make_op(16)
    s = StepSystem(5.0, 0.3, op, mobility)
    x = op.grid.constant(1.0)
    assert np.allclose(apply_system(s, x), 5.0 * x, rtol=0, atol=1e-12)


def test_fourier_mode_eigenvalue():
    op = make_op(16, beta=2.0)
    s = StepSystem(3.0, 0.2, op, "Lbar")
    X, Y = op.grid.mesh()
    x = np.cos(np.pi * 2 * X) * np.cos(np.pi * 3 * Y)
    lam = op.table.symbol[2, 3] + op.shift
    assert np.allclose(apply_system(s, x), (3.0 + 0.2 * lam**2) * x, rtol=1e-12, atol=1e-12)
    s_l = StepSystem(3.0, 0.2, op, "L")
    lam0 = op.table.symbol[2, 3]
    assert np.allclose(apply_system(s_l, x), (3.0 + 0.2 * lam0 * lam) * x, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("mobility", ["L", "Lbar"])
def test_apply_matches_dense_multiply(mobility, rng):
    op = make_op(12, beta=1.0)
    s = StepSystem(2.0, 0.05, op, mobility)
    A = dense_from_samples(op, 2.0, 0.05, mobility)
    x = rng.standard_normal(op.grid.shape)
    ref = (A @ x.ravel()).reshape(x.shape)
    assert np.abs(apply_system(s, x) - ref).max() <= 1e-12 * np.abs(ref).max()
    assert np.allclose(assemble_dense(s), A, rtol=0, atol=1e-12 * np.abs(A).max())


def test_system_validation():
    op = make_op(8)
    with pytest.raises(ValueError):
        StepSystem(0.0, 1.0, op)
    with pytest.raises(ValueError):
        StepSystem(1.0, -1.0, op)
    with pytest.raises(ValueError):
        StepSystem(1.0, 1.0, op, "G")


def test_cg_identity_system(rng):
    op = make_op(16)
    s = StepSystem(4.0, 0.0, op)
    b = rng.standard_normal(op.grid.shape)
    res = cg_solve(s, b)
    assert res.iterations == 1
    assert np.allclose(res.x, b / 4.0, rtol=1e-14, atol=0)


def test_cg_zero_rhs():
    op = make_op(8)
    res = cg_solve(StepSystem(1.0, 1.0, op), op.grid.zeros())
    assert res.iterations == 0 and not res.x.any()


@pytest.mark.parametrize("mobility", ["L", "Lbar"])
@pytest.mark.parametrize("precondition", [False, True])
def test_cg_matches_spectral(mobility, precondition, rng):
    op = make_op(32, delta=0.15, beta=2.0)
    s = StepSystem(100.0, 0.1, op, mobility)
    b = rng.standard_normal(op.grid.shape)
    res = cg_solve(s, b, tol=1e-13, precondition=precondition)
    ref = spectral_solve(s, b)
    assert np.linalg.norm(res.x - ref) <= 1e-10 * np.linalg.norm(ref)
    assert np.linalg.norm(apply_system(s, res.x) - b) <= 1e-13 * np.linalg.norm(b)
    if precondition:
        assert res.iterations <= 2


def test_cg_matches_dense_lu(rng):
    op = make_op(12, beta=2.0)
    s = StepSystem(10.0, 0.1, op)
    b = rng.standard_normal(op.grid.shape)
    x_cg = cg_solve(s, b).x
    x_lu = dense_solve(s, b)
    assert np.abs(x_cg - x_lu).max() <= 1e-9 * np.abs(x_lu).max()


def test_cg_warm_start(rng):
    op = make_op(32, delta=0.15)
    s = StepSystem(50.0, 0.1, op)
    b = rng.standard_normal(op.grid.shape)
    exact = spectral_solve(s, b)
    cold = cg_solve(s, b)
    warm = cg_solve(s, b, x0=exact + 1e-8 * rng.standard_normal(b.shape))
    assert warm.iterations < cold.iterations
    assert cg_solve(s, b, x0=exact).iterations <= 1


def test_cg_maxit_error(rng):
    op = make_op(32, delta=0.1)
    s = StepSystem(1e-3, 1.0, op)
    with pytest.raises(SolverError) as info:
        cg_solve(s, rng.standard_normal(op.grid.shape), tol=1e-14, maxit=2)
    assert info.value.iterations == 2 and info.value.residual > 1e-14
    with pytest.raises(ValueError):
        cg_solve(s, np.ones(op.grid.shape), tol=0.0)


def test_cg_error_decreases_in_energy_norm(rng):
    # the textbook CG monotonicity is in the A-norm of the error
    op = make_op(32, delta=0.1, beta=1.0)
    s = StepSystem(1.0, 0.5, op)
    b = rng.standard_normal(op.grid.shape)
    exact = spectral_solve(s, b)
    errs = []
    for k in range(1, 15):
        e = _cg_iterate(s, b, k) - exact
        errs.append(float(np.vdot(e, apply_system(s, e))))
    assert all(b_ <= a_ * (1 + 1e-12) for a_, b_ in zip(errs, errs[1:]))


def _cg_iterate(s, b, k):
    """Plain CG iterate after ``k`` steps (no stopping test)."""
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rr = np.vdot(r, r)
    for _ in range(k):
        Ap = apply_system(s, p)
        a = rr / np.vdot(p, Ap)
        x += a * p
        r -= a * Ap
        rr_new = np.vdot(r, r)
        p = r + rr_new / rr * p
        rr = rr_new
    return x


def test_cg_history_reaches_tolerance(rng):
    op = make_op(32, delta=0.1)
    s = StepSystem(10.0, 0.2, op)
    res = cg_solve(s, rng.standard_normal(op.grid.shape), tol=1e-12)
    assert res.history[0] == 1.0 and res.history[-1] <= 1e-12
    assert res.residual <= 1e-12


def test_linearity(rng):
    op = make_op(16, beta=2.0)
    s = StepSystem(20.0, 0.1, op)
    b1, b2 = rng.standard_normal((2,) + op.grid.shape)
    x12 = cg_solve(s, b1 + b2).x
    x1, x2 = cg_solve(s, b1).x, cg_solve(s, b2).x
    assert np.linalg.norm(x12 - x1 - x2) <= 1e-9 * np.linalg.norm(x12)


def test_spectral_examples(rng):
    op = make_op(16, beta=2.0, eps2=0.1)
    s = StepSystem(3.0, 0.01, op, "Lbar")
    b = op.grid.constant(5.0)
    assert np.allclose(spectral_solve(s, b), 5.0 / (3.0 + 0.01 * 20.0**2), rtol=1e-13, atol=0)
    r = rng.standard_normal(op.grid.shape)
    assert np.linalg.norm(apply_system(s, spectral_solve(s, r)) - r) <= 1e-12 * np.linalg.norm(r)


def test_dense_examples(rng):
    op = make_op(16, beta=1.0)
    b = rng.standard_normal(op.grid.shape)
    assert np.allclose(dense_solve(StepSystem(1.0, 0.0, op), b), b, rtol=0, atol=1e-14)
    s = StepSystem(7.0, 0.3, op)
    assert np.abs(dense_solve(s, b) - spectral_solve(s, b)).max() <= 1e-9 * np.abs(b).max()


def test_dense_guard():
    n = int(math.isqrt(DENSE_MAX_UNKNOWNS)) + 2
    n += n % 2
    op = make_op(n, delta=0.05)
    with pytest.raises(DenseSizeError):
        assemble_dense(StepSystem(1.0, 1.0, op))


def test_dense_solver_caches_factors(rng):
    op = make_op(12)
    ds = DenseSolver(keep=2)
    s1, s2, s3 = (StepSystem(a, 0.1, op) for a in (1.0, 2.0, 3.0))
    b = rng.standard_normal(op.grid.shape)
    lu = ds.factor(s1)
    assert ds.factor(s1) is lu
    ds.solve(s2, b)
    ds.solve(s3, b)
    assert len(ds._cache) == 2
    assert ds.factor(s1) is not lu
    ds.clear()
    assert not ds._cache


def test_iterations_grow_slowly():
    its = {}
    for N in (32, 64, 128):
        op = make_op(N, delta=0.05, beta=2.0, eps2=0.01)
        s = StepSystem(1.0 / 1e-3, 0.01, op)
        X, Y = op.grid.mesh()
        b = np.sin(np.pi * X) * np.cos(2 * np.pi * Y) + 0.1 * np.random.default_rng(N).standard_normal(X.shape)
        its[N] = cg_solve(s, b, tol=1e-12).iterations
    # no faster than logarithmic in N
    assert its[128] <= its[32] * math.log(128) / math.log(32) + 2
