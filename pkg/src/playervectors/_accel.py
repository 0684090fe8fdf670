"""Optional numba acceleration.

Set ``PLAYERVECTORS_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The flag
is read once at import time; :func:`set_backend` switches at runtime (tests and
the benchmark use it).
"""
import os

DISABLE_ENV = "PLAYERVECTORS_DISABLE_NUMBA"

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAS_NUMBA = False


def _env_disabled():
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


_backend = "numba" if HAS_NUMBA and not _env_disabled() else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]):
        return args[0]
    return lambda f: f


def get_backend():
    return _backend


def set_backend(name):
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name
