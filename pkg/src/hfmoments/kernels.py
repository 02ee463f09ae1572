"""Backend selection for the hot kernels.

The compiled extension is used when importable; otherwise (or when the
environment variable ``HFMOMENTS_PURE_PYTHON`` is set to a non-empty value)
the pure-Python twins are used.  Both expose identical functions.
"""

import importlib
import os

from . import _pykernels

_FORCE_PYTHON = bool(os.environ.get("HFMOMENTS_PURE_PYTHON"))

try:
    _compiled = importlib.import_module("hfmoments._kernels")
except ImportError:
    _compiled = None

if _compiled is not None and not _FORCE_PYTHON:
    _impl = _compiled
    BACKEND = "compiled"
else:
    _impl = _pykernels
    BACKEND = "python"

wick_product = _impl.wick_product
jordan_wigner_terms = _impl.jordan_wigner_terms
pauli_product = _impl.pauli_product
pauli_apply = _impl.pauli_apply


def available_backends():
    """Names of the backends importable in this environment."""
    return ["compiled", "python"] if _compiled is not None else ["python"]


def get_backend(name):
    """Return the kernel module for ``name`` ("compiled" or "python")."""
    if name == "python":
        return _pykernels
    if name == "compiled" and _compiled is not None:
        return _compiled
    raise ValueError(f"kernel backend {name!r} is not available")
