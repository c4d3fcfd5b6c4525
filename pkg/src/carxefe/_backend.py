"""Pick the compiled kernels when available, else the pure-Python ones.

Set ``CARXEFE_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("CARXEFE_PURE_PYTHON", "") not in ("", "0"):
    from ._fallback import efe_grid, msd_advance
else:
    try:
        from ._kernels import efe_grid, msd_advance

        BACKEND = "cython"
    except ImportError:
        from ._fallback import efe_grid, msd_advance

__all__ = ["BACKEND", "efe_grid", "msd_advance"]
