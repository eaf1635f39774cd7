"""Kernel backend selection: compiled extension if available, else pure Python.

Both backends implement the same two functions (``eval_population``,
``next_population``) with bit-identical arithmetic, so which one runs only
affects speed.  Set DRONEFOG_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _core_py

try:
    from . import _core as _core_native
except ImportError:
    _core_native = None

_NAMES = {"native", "python"}


def available_backends() -> tuple:
    return ("native", "python") if _core_native is not None else ("python",)


def default_backend() -> str:
    if _core_native is None or os.environ.get("DRONEFOG_PURE_PYTHON") == "1":
        return "python"
    return "native"


def get_kernels(name: str | None = None):
    """Return the kernel module for ``name`` ('native' / 'python' / None=auto)."""
    if name is None:
        name = default_backend()
    if name not in _NAMES:
        raise ValueError(f"unknown backend {name!r}; expected 'native' or 'python'")
    if name == "native":
        if _core_native is None:
            raise RuntimeError("the compiled dronefog._core extension is not installed")
        return _core_native
    return _core_py
