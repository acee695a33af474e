"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``SPECDET_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
theta_sum = _pykernels.theta_sum
geodesic_log_sum = _pykernels.geodesic_log_sum

if os.environ.get("SPECDET_PURE_PYTHON") != "1":
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        theta_sum = _ckernels.theta_sum
        geodesic_log_sum = _ckernels.geodesic_log_sum
        BACKEND = "cython"

__all__ = ["BACKEND", "theta_sum", "geodesic_log_sum"]
