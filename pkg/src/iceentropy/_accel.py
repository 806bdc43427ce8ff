"""Optional numba acceleration.

Hot kernels are written once in plain numpy-compatible Python and wrapped with
:func:`jit`.  Set ``ICEENTROPY_NUMBA=0`` to force the pure-numpy fallback (the
vectorised kernels in each module are then used instead of the compiled loops).
"""

from __future__ import annotations

import os

_flag = os.environ.get("ICEENTROPY_NUMBA", "1").strip().lower()

try:
    if _flag in ("0", "false", "no", "off"):
        raise ImportError("numba disabled by ICEENTROPY_NUMBA")
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _numba = None
    HAVE_NUMBA = False


def jit(func=None, **kwargs):
    """``numba.njit(nogil=True, cache=True)`` when available, else identity."""
    opts = {"nogil": True, "cache": True}
    opts.update(kwargs)

    def wrap(f):
        if HAVE_NUMBA:
            return _numba.njit(**opts)(f)
        return f

    if func is None:
        return wrap
    return wrap(func)


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def kernel(fallback):
    """Compile the decorated loop kernel, or use ``fallback`` when numba is off.

    Both implementations must share a signature and agree numerically; the
    benchmark and the test suite exercise each path.
    """

    def wrap(loop_impl):
        if HAVE_NUMBA:
            compiled = jit(loop_impl)
            compiled.fallback = fallback
            return compiled
        fallback.fallback = fallback
        return fallback

    return wrap
