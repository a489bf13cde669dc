"""Initial conditions for the three reference experiments."""
import math

import numpy as np

from .grid import GridSpec


def init_example1(g: GridSpec, amplitude: float = 0.8) -> np.ndarray:
    X, Y = g.mesh()
    return amplitude * np.sin(np.pi * X) * np.sin(np.pi * Y)


def init_example2(g: GridSpec, eps: float, R0: float = 0.36, centers=((0.4, 0.0), (-0.4, 0.0)),
                  offset: float | None = None) -> np.ndarray:
    """``offset + sum_i -tanh((|x - c_i| - R0) / (sqrt(2) eps))``.

    ``offset`` defaults to ``len(centers) - 1`` so the bubbles sit at +1 in
    a -1 matrix; ``offset=0`` gives the bare tanh sum (matrix at -n).
    """
    if offset is None:
        offset = len(centers) - 1.0
    X, Y = g.mesh()
    phi = np.full(g.shape, float(offset))
    for a, b in centers:
        r = np.sqrt((X - a) ** 2 + (Y - b) ** 2)
        phi -= np.tanh((r - R0) / (math.sqrt(2.0) * eps))
    return phi


def init_example3(g: GridSpec, phi_a: float, phi_b: float, seed: int = 0) -> np.ndarray:
    """``phi_a + phi_b*u`` with u uniform on [-1, 1], shifted to zero mean."""
    if abs(phi_a) + abs(phi_b) > 1.0:
        raise ValueError("need |phi_a| + |phi_b| <= 1")
    if phi_b == 0.0:
        return g.constant(phi_a)
    u = np.random.default_rng(seed).uniform(-1.0, 1.0, size=g.shape)
    u -= u.mean()
    phi = phi_a + phi_b * u
    # remove the last-ulp drift of the mean
    phi += phi_a - phi.mean()
    return phi
