"""Kernel backend selection.

The compiled extension is used when importable; ``QBAFX_PURE_PYTHON=1`` forces
the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("QBAFX_PURE_PYTHON", "") not in ("", "0"):
    backend = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as backend  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        backend = _kernels_py
        BACKEND = "python"


def available_backends() -> dict:
    out = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
