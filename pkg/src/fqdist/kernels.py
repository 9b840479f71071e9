"""Backend selection for the counting kernels.

The compiled module is used when it imports; otherwise the numpy fallback.
Set ``FQDIST_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("FQDIST_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # pragma: no cover - depends on build
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

BACKENDS = {"python": python_backend}
if compiled_backend is not None:
    BACKENDS["cython"] = compiled_backend


def get(name: str | None = None):
    if name is None:
        return backend
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
