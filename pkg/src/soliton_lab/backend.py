"""Kernel selection.

The compiled kernel is used when it was built; otherwise the numpy kernel
takes over.  Set ``SOLITON_LAB_BACKEND=python`` to force the fallback, or
``cython`` to make a missing extension an error.
"""

import importlib
import os

from . import _kernel_py

_ENV = "SOLITON_LAB_BACKEND"


def load(name=None):
    """Return a kernel module by name (``"cython"``, ``"python"`` or ``None``
    for automatic selection)."""
    if name is None:
        name = os.environ.get(_ENV, "auto").strip().lower() or "auto"
    if name == "python":
        return _kernel_py
    if name not in ("auto", "cython"):
        raise ValueError(f"unknown backend {name!r}; expected auto, cython or python")
    try:
        return importlib.import_module("soliton_lab._kernel_cy")
    except ImportError:
        if name == "cython":
            raise
        return _kernel_py


def available():
    names = ["python"]
    try:
        importlib.import_module("soliton_lab._kernel_cy")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


kernel = load()
