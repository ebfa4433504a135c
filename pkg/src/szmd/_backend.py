"""Kernel backend selection: compiled extension if available, NumPy otherwise.

The compiled backend (szmd._kernels, built from _kernels.pyx) and the pure
backend (szmd._kernels_py) implement the same entry points; which one is
active is decided at import time and can be overridden with the environment
variable SZMD_BACKEND (``compiled`` | ``python``) or at runtime with
:func:`set_backend`.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # extension not built; pure fallback
    _kernels = None

_BACKENDS = {"python": _kernels_py}
if _kernels is not None:
    _BACKENDS["compiled"] = _kernels

_requested = os.environ.get("SZMD_BACKEND", "auto").lower()
if _requested in ("auto", ""):
    _active = _kernels if _kernels is not None else _kernels_py
elif _requested in _BACKENDS:
    _active = _BACKENDS[_requested]
else:
    raise ImportError(
        f"SZMD_BACKEND={_requested!r} is not available; "
        f"choose one of {sorted(_BACKENDS)} or 'auto'"
    )


def kernels():
    """The active kernel module."""
    return _active


def backend_name() -> str:
    return _active.name


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str):
    """Switch the active backend ('compiled' or 'python'); returns it."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {sorted(_BACKENDS)}")
    _active = _BACKENDS[name]
    return _active


def get_backend(name: str):
    """A specific backend module without switching the active one."""
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {sorted(_BACKENDS)}")
    return _BACKENDS[name]
