"""Optional numba acceleration.

Set ``JOINTMEAS_DISABLE_NUMBA=1`` to force the pure-numpy kernels. Numba's own
``NUMBA_DISABLE_JIT`` is honoured too, since it turns ``njit`` into a no-op.
"""

import os

_FLAG = os.environ.get("JOINTMEAS_DISABLE_NUMBA", "").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("1", "true", "yes", "on")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = NUMBA_REQUESTED and HAVE_NUMBA

NJIT_OPTS = {"cache": False, "nogil": True}


def njit(func):
    """``numba.njit`` when numba is installed, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(**NJIT_OPTS)(func)
