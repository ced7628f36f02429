"""Backend selection for the hot loss kernels.

The numba backend is used by default. Set ``MFTR_NO_NUMBA=1`` in the
environment (before import) to force the pure-numpy fallback; the fallback
is also selected automatically when numba is not installed. Both backends
implement identical formulas and agree to near machine precision, but they
are not bit-identical to each other, so a reproducibility comparison must
hold the backend fixed.
"""

import os

_flag = os.environ.get("MFTR_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in {"1", "true", "yes", "on"}

if NUMBA_DISABLED:
    from . import numpy_ref as _impl

    BACKEND = "numpy"
else:
    try:
        from . import numba_fast as _impl

        BACKEND = "numba"
    except ImportError:
        from . import numpy_ref as _impl

        BACKEND = "numpy"

logloss_value = _impl.logloss_value
logloss_gradient = _impl.logloss_gradient
logloss_hvp = _impl.logloss_hvp
logloss_curvature = _impl.logloss_curvature
sq_sigmoid_value = _impl.sq_sigmoid_value
sq_sigmoid_gradient = _impl.sq_sigmoid_gradient
sq_sigmoid_hvp = _impl.sq_sigmoid_hvp
sq_sigmoid_curvature = _impl.sq_sigmoid_curvature


def active_backend():
    """Name of the kernel backend in use, 'numba' or 'numpy'."""
    return BACKEND
