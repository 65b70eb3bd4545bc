"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the NumPy
implementation when the extension is unavailable. Set the environment
variable ``BEAMQUBIT_PURE_KERNELS=1`` to force the fallback (useful for
benchmarking and debugging).
"""

import os

from . import pure as _pure

if os.environ.get("BEAMQUBIT_PURE_KERNELS", "").lower() in ("1", "true", "yes"):
    _impl = _pure
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = _pure

BACKEND = _impl.NAME

k1_scalar = _impl.k1_scalar
k1_array = _impl.k1_array
readout_sums = _impl.readout_sums
cosine_filter_diag = _impl.cosine_filter_diag
cosine_filter_matrix = _impl.cosine_filter_matrix


def backend_name():
    """Name of the active kernel backend: ``"cython"`` or ``"pure"``."""
    return BACKEND
