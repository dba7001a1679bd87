"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the numpy
fallback is always available. `BEAMSENSE_BACKEND=numpy|cython` forces a
choice (forcing `cython` without the built extension is an error).
"""

import os

from . import kernels_np

try:
    from . import _kernels
except ImportError:
    _kernels = None

_forced = os.environ.get("BEAMSENSE_BACKEND", "").strip().lower()
if _forced == "numpy":
    kernels = kernels_np
elif _forced == "cython":
    if _kernels is None:
        raise ImportError("BEAMSENSE_BACKEND=cython but the compiled extension is not built")
    kernels = _kernels
elif _forced:
    raise ValueError(f"unknown BEAMSENSE_BACKEND {_forced!r}")
else:
    kernels = _kernels if _kernels is not None else kernels_np

BACKEND_NAME = kernels.NAME


def available_backends():
    out = {"numpy": kernels_np}
    if _kernels is not None:
        out["cython"] = _kernels
    return out
