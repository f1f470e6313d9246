"""Eigensolver backend selection.

The compiled extension is preferred when importable; the pure-Python twin is
used otherwise.  ``SZLAB_BACKEND=python`` or ``SZLAB_BACKEND=compiled`` forces
the choice (the latter raises if the extension was never built).
"""

from __future__ import annotations

import os

from . import _eigen_py

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None


def _select():
    forced = os.environ.get("SZLAB_BACKEND", "").strip().lower()
    if forced == "python":
        return _eigen_py
    if forced == "compiled":
        if _kernels is None:
            raise ImportError(
                "SZLAB_BACKEND=compiled but the szlab._kernels extension is not built"
            )
        return _kernels
    if forced:
        raise ValueError(f"unknown SZLAB_BACKEND value: {forced!r}")
    return _kernels if _kernels is not None else _eigen_py


_impl = _select()

ACTIVE_BACKEND: str = _impl.BACKEND_NAME
eigh_symmetric = _impl.eigh_symmetric
ConvergenceFailure = _impl.ConvergenceFailure


def available_backends():
    """Names of the kernel implementations importable in this environment."""
    names = [_eigen_py.BACKEND_NAME]
    if _kernels is not None:
        names.insert(0, _kernels.BACKEND_NAME)
    return names
