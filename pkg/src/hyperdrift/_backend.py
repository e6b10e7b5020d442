"""Kernel backend selection.

``HYPERDRIFT_BACKEND=numpy`` forces the pure-numpy kernels; the default uses
numba when it imports cleanly.
"""
import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None

HAVE_NUMBA = _numba is not None


def requested_backend():
    name = os.environ.get("HYPERDRIFT_BACKEND", "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"HYPERDRIFT_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


BACKEND = requested_backend()


def njit(*args, **kwargs):
    """``numba.njit`` with the package defaults, or a no-op when numba is absent."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if _numba is None:
        def wrap(fn):
            return fn
        return wrap(args[0]) if args and callable(args[0]) else wrap
    return _numba.njit(*args, **kwargs)
