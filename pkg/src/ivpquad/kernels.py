"""Backend selection for the hot kernels.

The compiled extension ``ivpquad._kernels`` is used when it was built and
``IVPQUAD_PURE_PYTHON`` is unset (or ``0``); otherwise the pure-Python
module ``ivpquad._kernels_py`` is loaded. Both expose identical functions.
"""
import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("IVPQUAD_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend

BACKEND = "python" if _active.PURE_PYTHON else "compiled"

clenshaw = _active.clenshaw
clenshaw_array = _active.clenshaw_array
lu_factor = _active.lu_factor
lu_solve = _active.lu_solve
picard_cos_element = _active.picard_cos_element
