"""Kernel backend selection.

The hot loops (per-cell closure, wave speeds, HLL updates, tridiagonal
eigenvalues) have two implementations: numba ``@njit`` kernels and a
vectorized pure-numpy fallback.  The fallback is selected by setting the
environment variable ``HYQMOM_PURE_NUMPY`` to a truthy value (``1``,
``true``, ``yes``) before import, or automatically when numba is not
importable.  ``benchmarks/benchmark_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

from . import kernels_numpy

_FLAG = os.environ.get("HYQMOM_PURE_NUMPY", "").strip().lower()
_FORCE_NUMPY = _FLAG in {"1", "true", "yes", "on"}

if not _FORCE_NUMPY:
    try:
        from . import kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:
        _impl = kernels_numpy
        BACKEND = "numpy"
else:
    _impl = kernels_numpy
    BACKEND = "numpy"

closure_speeds_batch = _impl.closure_speeds_batch
hll_update = _impl.hll_update
tridiag_eigen = _impl.tridiag_eigen
STATUS_NO_CONVERGENCE = -1000


def backend_name() -> str:
    return BACKEND
