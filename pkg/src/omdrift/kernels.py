"""Kernel dispatch: compiled Cython core when importable, pure Python otherwise.

Set ``OMDRIFT_PURE_PYTHON=1`` before import to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("OMDRIFT_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

structure_map = _impl.structure_map
el_rhs = _impl.el_rhs
rk4_path = _impl.rk4_path
drift_terms = _impl.drift_terms
cascade = _impl.cascade
