"""Pick the compiled kernels when available, else the numpy fallback.

Set ``BSCMATCH_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

if os.environ.get("BSCMATCH_PURE_PYTHON", "") not in ("", "0"):
    kernels = _fallback
    NAME = "python"
else:
    try:
        from . import _kernels as kernels
        NAME = "cython"
    except ImportError:
        kernels = _fallback
        NAME = "python"
