"""Backend selection for the hot kernels.

The compiled extension is preferred. Set ``V2VCHAN_PURE_PYTHON=1`` to force
the numpy fallback (useful for benchmarking and debugging).
"""
import os

from . import _pykernels as python_backend

try:
    if os.environ.get("V2VCHAN_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python backend requested")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

accumulate_lanczos = _active.accumulate_lanczos
accumulate_dirichlet = _active.accumulate_dirichlet
row_spread = _active.row_spread
