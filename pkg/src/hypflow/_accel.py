"""Optional numba acceleration.

Set ``HYPFLOW_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. to
compare the two paths or to debug without compilation.
"""

import os

_DISABLED = os.environ.get("HYPFLOW_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    import numba

    njit = numba.njit
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def use_numba() -> bool:
    return HAVE_NUMBA
