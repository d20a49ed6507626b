"""Kernel selection.

The compiled ``_core`` extension is used when it was built; otherwise, or
when ``VIDMARK_PURE_PYTHON`` is set, the pure-Python ``_core_py`` kernels
are used.  Both expose the same functions.
"""

import os

from . import _core_py

KERNELS = {"python": _core_py}
try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    KERNELS["cython"] = _compiled

if _compiled is not None and not os.environ.get("VIDMARK_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def kernel(name=None):
    return KERNELS[name or BACKEND]


def available():
    return sorted(KERNELS)
