"""Kernel backend selection.

``VCAUSAL_BACKEND=numpy`` forces the pure-numpy path. Otherwise the numba
kernels are used when numba imports, with a silent fall back to numpy.
"""
import os

from . import _kernels_numpy

ENV_FLAG = "VCAUSAL_BACKEND"


def _select():
    if os.environ.get(ENV_FLAG, "numba").strip().lower() == "numpy":
        return _kernels_numpy
    try:
        from . import _kernels_numba
    except ImportError:
        return _kernels_numpy
    return _kernels_numba


kernels = _select()
BACKEND = kernels.NAME
