"""Backend selection for the hot kernels.

The compiled extension is used when it was built and imports cleanly; set
``DOUBLEPOOL_PURE_PYTHON=1`` to force the pure-Python versions.  Both
backends return identical results.
"""

import os

from . import _kernels_py

if os.environ.get("DOUBLEPOOL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

scan_min_cost = _impl.scan_min_cost
count_retests = _impl.count_retests

__all__ = ["BACKEND", "scan_min_cost", "count_retests"]
