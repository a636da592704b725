"""Select the compiled core when it is built, else the numpy fallback.

Set ``MANIREG_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("MANIREG_PURE_PYTHON", "") not in ("", "0"):
    from manireg import _purecore as core
    BACKEND = "python"
else:
    try:
        from manireg import _core as core
        BACKEND = "cython"
    except ImportError:
        from manireg import _purecore as core
        BACKEND = "python"

cheeger_enumerate = core.cheeger_enumerate
sweep_scan = core.sweep_scan
knn_select = core.knn_select
