"""Backend selection for the hot kernels.

Set ``CVDE_NUMBA=0`` to run the pure-numpy twins in :mod:`cvde._np` instead of
the compiled kernels in :mod:`cvde._nb`. ``CVDE_THREADS`` caps the number of
numba worker threads.
"""
import os

_FALSE = {"0", "false", "no", "off"}


def _want_numba():
    if os.environ.get("CVDE_NUMBA", "1").strip().lower() in _FALSE:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _want_numba()

if USE_NUMBA:
    from . import _nb as backend
else:
    from . import _np as backend

BACKEND = "numba" if USE_NUMBA else "numpy"

__all__ = ["USE_NUMBA", "BACKEND", "backend"]
