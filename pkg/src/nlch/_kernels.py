"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with identical semantics; the public
names at the bottom of the module dispatch on :data:`nlch._accel.HAVE_NUMBA`.
"""
import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

# exp(-IMAGE_CUTOFF**2) ~ 1e-20: periodic images farther than this many
# kernel widths are dropped.
IMAGE_CUTOFF = 6.8


def n_images(L: float, delta: float) -> int:
    """Number of periodic images per side needed for a wrapped offset |d| <= L."""
    return max(0, int(math.floor((IMAGE_CUTOFF * delta / L + 1.0) / 2.0)))


@njit(cache=True)
def _wrapped_gauss_1d(d, L, delta, nimg):
    # wrap into [-L, L] then sum the periodic images of exp(-d^2/delta^2)
    period = 2.0 * L
    d = d - period * math.floor(d / period + 0.5)
    s = 0.0
    for a in range(-nimg, nimg + 1):
        z = (d + period * a) / delta
        s += math.exp(-z * z)
    return s


@njit(cache=True)
def _direct_trapezoid_nb(phi, x, y, Lx, Ly, delta, coef, nix, niy):
    nx, ny = phi.shape
    hx = 2.0 * Lx / nx
    hy = 2.0 * Ly / ny
    # the kernel is separable: tabulate the weighted 1D factors once
    gx = np.empty((nx, nx + 1))
    for i in range(nx):
        for m1 in range(nx + 1):
            w1 = 0.5 if (m1 == 0 or m1 == nx) else 1.0
            gx[i, m1] = w1 * _wrapped_gauss_1d(x[m1] - x[i], Lx, delta, nix)
    gy = np.empty((ny, ny + 1))
    for j in range(ny):
        for m2 in range(ny + 1):
            w2 = 0.5 if (m2 == 0 or m2 == ny) else 1.0
            gy[j, m2] = w2 * _wrapped_gauss_1d(y[m2] - y[j], Ly, delta, niy)
    out = np.empty((nx, ny))
    for i in range(nx):
        for j in range(ny):
            j1 = 0.0
            jphi = 0.0
            for m1 in range(nx + 1):
                p1 = m1 % nx
                a = coef * gx[i, m1]
                for m2 in range(ny + 1):
                    w = a * gy[j, m2]
                    j1 += w
                    jphi += w * phi[p1, m2 % ny]
            out[i, j] = hx * hy * (j1 * phi[i, j] - jphi)
    return out


def _wrapped_gauss_1d_np(d, L, delta, nimg):
    period = 2.0 * L
    d = d - period * np.floor(d / period + 0.5)
    a = np.arange(-nimg, nimg + 1)
    z = (d[..., None] + period * a) / delta
    return np.exp(-z * z).sum(axis=-1)


def _direct_trapezoid_np(phi, x, y, Lx, Ly, delta, coef, nix, niy):
    nx, ny = phi.shape
    hx, hy = 2.0 * Lx / nx, 2.0 * Ly / ny
    wx = np.ones(nx + 1)
    wx[[0, -1]] = 0.5
    wy = np.ones(ny + 1)
    wy[[0, -1]] = 0.5
    # closed (N+1)-point field rebuilt from periodicity
    phi_ext = np.empty((nx + 1, ny + 1))
    phi_ext[:nx, :ny] = phi
    phi_ext[nx, :ny] = phi[0]
    phi_ext[:, ny] = phi_ext[:, 0]
    out = np.empty((nx, ny))
    for i in range(nx):
        gx = wx * _wrapped_gauss_1d_np(x - x[i], Lx, delta, nix)
        for j in range(ny):
            gy = wy * _wrapped_gauss_1d_np(y - y[j], Ly, delta, niy)
            kern = coef * np.outer(gx, gy)
            out[i, j] = hx * hy * (kern.sum() * phi[i, j] - np.sum(kern * phi_ext))
    return out


@njit(cache=True)
def _dwell_sum_nb(phi, beta):
    s = 0.0
    for v in phi.reshape(-1):
        u = v * v - 1.0 - beta
        s += 0.25 * u * u
    return s


def _dwell_sum_np(phi, beta):
    u = phi * phi - 1.0 - beta
    return 0.25 * float(np.sum(u * u))


@njit(cache=True)
def _dwell_deriv_nb(phi, beta):
    out = np.empty_like(phi)
    flat_in = phi.reshape(-1)
    flat_out = out.reshape(-1)
    for k in range(flat_in.size):
        v = flat_in[k]
        flat_out[k] = v * v * v - (1.0 + beta) * v
    return out


def _dwell_deriv_np(phi, beta):
    return phi * phi * phi - (1.0 + beta) * phi


def direct_trapezoid(phi, x, y, Lx, Ly, delta, coef):
    """O(N^4) trapezoidal quadrature of (J*1)phi - J*phi on the closed grid.

    ``x``/``y`` hold the N+1 closed-grid coordinates; ``phi`` the N x N
    unique periodic nodes.
    """
    nix, niy = n_images(Lx, delta), n_images(Ly, delta)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    if HAVE_NUMBA:
        return _direct_trapezoid_nb(phi, x, y, float(Lx), float(Ly), float(delta), float(coef), nix, niy)
    return _direct_trapezoid_np(phi, x, y, Lx, Ly, delta, coef, nix, niy)


def periodic_gauss_1d(d, L, delta):
    """Image-summed ``exp(-d^2/delta^2)`` with period ``2L`` (vectorised)."""
    return _wrapped_gauss_1d_np(np.asarray(d, dtype=float), L, delta, n_images(L, delta))


def dwell_sum(phi, beta):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    if HAVE_NUMBA:
        return float(_dwell_sum_nb(phi, float(beta)))
    return _dwell_sum_np(phi, beta)


def dwell_deriv_field(phi, beta):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    if HAVE_NUMBA:
        return _dwell_deriv_nb(phi, float(beta))
    return _dwell_deriv_np(phi, beta)


# explicit handles for the benchmark and equivalence tests
NUMPY_IMPLS = {
    "direct_trapezoid": _direct_trapezoid_np,
    "dwell_sum": _dwell_sum_np,
    "dwell_deriv": _dwell_deriv_np,
}
NUMBA_IMPLS = {
    "direct_trapezoid": _direct_trapezoid_nb,
    "dwell_sum": _dwell_sum_nb,
    "dwell_deriv": _dwell_deriv_nb,
} if HAVE_NUMBA else {}
