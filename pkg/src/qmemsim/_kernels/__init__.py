"""Chain-stepping kernels: compiled extension when available, pure Python
otherwise. Set QMEMSIM_KERNEL=python to force the fallback."""

from __future__ import annotations

import importlib
import os

from . import chain_py

_FORCED = os.environ.get("QMEMSIM_KERNEL", "").strip().lower()

chain_cy = None
if _FORCED not in ("python", "py", "pure"):
    try:
        chain_cy = importlib.import_module(".chain_cy", __name__)
    except ImportError:
        chain_cy = None

DEFAULT_BACKEND = "cython" if chain_cy is not None else "python"


def available_backends() -> tuple[str, ...]:
    return ("python", "cython") if chain_cy is not None else ("python",)


def get_kernel(backend: str | None = None):
    """Resolve a backend name ('python', 'cython', None for best) to the
    module exposing run_chain_steps."""
    name = (backend or DEFAULT_BACKEND).lower()
    if name in ("python", "py", "pure"):
        return chain_py
    if name in ("cython", "compiled", "c"):
        if chain_cy is None:
            raise RuntimeError("compiled kernel not available; rebuild or use backend='python'")
        return chain_cy
    raise ValueError(f"unknown kernel backend {backend!r}")
