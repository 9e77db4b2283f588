"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
mirror. ``ISINGOPT_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

_compiled: ModuleType | None
try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and os.environ.get("ISINGOPT_PURE_PYTHON", "") not in ("", "0"):
    _default = _pykernels
else:
    _default = _compiled or _pykernels

BACKEND = "compiled" if _default is _compiled else "python"


def available() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def get(name: str | None = None) -> ModuleType:
    """Return the kernel module called ``name`` (default: the import-time choice)."""
    if name is None:
        return _default
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; reinstall with Cython available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def name_of(module: ModuleType) -> str:
    return "compiled" if module is _compiled else "python"
