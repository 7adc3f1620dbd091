"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy fallback.
Set ``SYNTHAUDIT_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SYNTHAUDIT_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined, no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

nearest_l1 = _impl.nearest_l1
best_split = _impl.best_split
fnv1a_64 = _impl.fnv1a_64


def backends() -> dict:
    """All importable backends by name (the fallback is always present)."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
