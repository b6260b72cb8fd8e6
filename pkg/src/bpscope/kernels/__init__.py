"""Statevector kernels with a numba fast path and a vectorised numpy fallback.

The backend is picked once at import time from the ``BPSCOPE_BACKEND``
environment variable (``numba`` by default, ``numpy`` to force the fallback)
and can be switched at runtime with :func:`set_backend`, which the benchmark
and the backend-equivalence tests rely on.
"""

from __future__ import annotations

import os

from . import numpy_impl

_IMPLS = {"numpy": numpy_impl}
_numba_error: Exception | None = None

try:
    from . import numba_impl

    _IMPLS["numba"] = numba_impl
except Exception as exc:  # pragma: no cover - only without numba installed
    _numba_error = exc

_requested = os.environ.get("BPSCOPE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"BPSCOPE_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
_active = _requested if _requested in _IMPLS else "numpy"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def get_backend_name() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _IMPLS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    _active = name


def backend():
    """Return the module implementing the active backend."""
    return _IMPLS[_active]


def impl(name: str):
    """Return a specific backend module regardless of the active choice."""
    return _IMPLS[name]
