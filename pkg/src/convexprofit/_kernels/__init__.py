"""Frank-Wolfe hot-loop kernels.

The compiled Cython kernel is preferred; the pure-numpy fallback implements
the identical contract and is selected automatically when the extension is
unavailable. Both are importable for side-by-side benchmarking.
"""

from .fallback import fw_maximize as fw_maximize_python
from .fallback import greedy_select

try:
    from ._fwcore import fw_maximize as fw_maximize_compiled

    BACKEND = "compiled"
    fw_maximize = fw_maximize_compiled
except ImportError:  # extension not built
    fw_maximize_compiled = None
    BACKEND = "python"
    fw_maximize = fw_maximize_python

__all__ = [
    "fw_maximize",
    "fw_maximize_python",
    "fw_maximize_compiled",
    "greedy_select",
    "BACKEND",
]
