"""Backend selection for the hot numeric kernels.

Every kernel in :mod:`adiabreak._kernels` exists twice: an element loop that is
compiled with ``numba.njit`` and a vectorised pure-numpy version.  The loop
versions are used unless ``ADIABREAK_DISABLE_JIT`` is set to a true value or
numba cannot be imported.  Both paths stay importable so that tests and the
benchmark can compare them directly.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
JIT_DISABLED = os.environ.get("ADIABREAK_DISABLE_JIT", "").strip().lower() not in _FALSY
USE_NUMBA = HAVE_NUMBA and not JIT_DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise.

    Compilation is independent of ``USE_NUMBA`` so the compiled kernels can
    still be benchmarked when the flag routes production calls to numpy.
    """
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
