"""Selects the integration kernel at import time.

The compiled Cython kernel is preferred; the pure-Python fallback keeps the
package functional when the extension was not built. Setting
EPIFIT_PURE_PYTHON=1 forces the fallback (used by the benchmark and tests).
"""

import os

if os.environ.get("EPIFIT_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

run_sir = _impl.run_sir
