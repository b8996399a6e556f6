"""Hot kernels: compiled extension when available, numpy fallback otherwise.

Set ``CNLS_LAB_KERNELS=python`` to force the fallback.
"""
import os

from . import _pykernels as python

BACKEND = "python"
compiled = None
if os.environ.get("CNLS_LAB_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None
    else:
        BACKEND = "cython"

_impl = compiled if compiled is not None else python

nonlinear_phase = _impl.nonlinear_phase
rk4 = _impl.rk4

NONSYM, SYM, BOOK = python.NONSYM, python.SYM, python.BOOK
OK, HALT_FLOOR, HALT_NONFINITE = python.OK, python.HALT_FLOOR, python.HALT_NONFINITE

__all__ = ["BACKEND", "nonlinear_phase", "rk4", "python", "compiled"]
