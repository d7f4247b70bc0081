"""Selects the threshold-path kernel backend at import time.

The compiled extension is preferred; the NumPy implementation is the fallback.
Set RESMETRICS_BACKEND=python (or =c) to force a choice, e.g. for the
benchmark in benchmarks/bench_kernels.py.
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("RESMETRICS_BACKEND", "").strip().lower()

if _forced == "python":
    kernels = _kernels_py
elif _forced == "c":
    from . import _kernels as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND_NAME


def available_backends():
    """Names of the kernel backends importable in this environment."""
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.insert(0, "c")
    except ImportError:
        pass
    return names
