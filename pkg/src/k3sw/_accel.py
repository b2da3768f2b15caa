"""Backend selection for the hot kernels.

Set ``K3SW_DISABLE_NUMBA=1`` to force the pure-numpy code paths even when
numba is importable.  The flag is read once, at import time.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("K3SW_DISABLE_NUMBA", "").lower() in _FALSY


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, otherwise an identity decorator."""
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    return _numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
