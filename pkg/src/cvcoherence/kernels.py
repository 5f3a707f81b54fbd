"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Setting ``CVCOHERENCE_PURE_PYTHON=1`` forces the fallback.
``BACKEND`` names the active implementation.
"""

import os

from cvcoherence import _kernels_py

if os.environ.get("CVCOHERENCE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from cvcoherence import _ckernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"

block_moments = _impl.block_moments
entropy_g = _impl.entropy_g
one_mode_nu = _impl.one_mode_nu
two_mode_spectra = _impl.two_mode_spectra

__all__ = ["BACKEND", "block_moments", "entropy_g", "one_mode_nu", "two_mode_spectra"]
