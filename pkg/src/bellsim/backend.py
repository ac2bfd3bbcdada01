"""Kernel selection.

The compiled kernel is used when it imports; otherwise the numpy kernel.
Set ``BELLSIM_PURE_PYTHON=1`` to force the numpy kernel.
"""
from __future__ import annotations

import os

from . import _fallback

fallback = _fallback
compiled = None

try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and os.environ.get("BELLSIM_PURE_PYTHON", "") in ("", "0"):
    kernel = compiled
else:
    kernel = fallback

NAME = kernel.NAME
