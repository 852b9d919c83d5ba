"""Backend selection for the hot adjustment loop.

The compiled extension is used when importable. Setting
``HAWKDOVE_PURE_PYTHON=1`` forces the pure-Python implementation; both
produce bit-identical results.
"""

import os

from . import _kernels_py

if os.environ.get("HAWKDOVE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

adjust_into = _impl.adjust_into
python_adjust_into = _kernels_py.adjust_into

__all__ = ["BACKEND", "adjust_into", "python_adjust_into"]
