"""Numba dispatch.

Hot kernels are written once as plain loops and compiled with numba when it is
available.  Setting ``BATHENT_NUMBA=0`` in the environment disables compilation;
modules then fall back to their vectorized numpy implementations.
"""
import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("BATHENT_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(func=None, **kwargs):
    """``numba.njit(cache=True)`` if enabled, identity otherwise."""
    def wrap(f):
        if USE_NUMBA:
            return numba.njit(cache=True, **kwargs)(f)
        return f

    if func is None:
        return wrap
    return wrap(func)


def backend():
    return "numba" if USE_NUMBA else "numpy"
