"""Numba switch for the hot loops.

Set ``NLCH_PURE_NUMPY=1`` in the environment to force the numpy fallback
kernels (also used automatically when numba cannot be imported).
"""
import os

_FORCE_NUMPY = os.environ.get("NLCH_PURE_NUMPY", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _FORCE_NUMPY:
        raise ImportError("numba disabled by NLCH_PURE_NUMPY")
    import numba as _nb

    HAVE_NUMBA = True
except ImportError:
    _nb = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        return _nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
