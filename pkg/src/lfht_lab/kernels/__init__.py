"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time from the LFHT_KERNEL environment
variable: "numba" (require the jitted path), "numpy" (force the fallback), or
"auto" (default: numba when importable).  Both backends produce bitwise
identical outputs, so the switch affects speed only; see
benchmarks/bench_kernels.py for a comparison.
"""

from __future__ import annotations

import os

from . import _numpy_impl

_requested = os.environ.get("LFHT_KERNEL", "auto").lower()
if _requested not in {"auto", "numba", "numpy"}:
    raise RuntimeError(
        f"LFHT_KERNEL must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )

if _requested in {"auto", "numba"}:
    try:
        from . import _numba_impl as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        _impl = _numpy_impl
        BACKEND = "numpy"
else:
    _impl = _numpy_impl
    BACKEND = "numpy"

batch_counts = _impl.batch_counts
l2_diff_numerator = _impl.l2_diff_numerator
collision_pairs = _impl.collision_pairs
route_bins = _impl.route_bins

__all__ = [
    "BACKEND",
    "batch_counts",
    "collision_pairs",
    "l2_diff_numerator",
    "route_bins",
]
