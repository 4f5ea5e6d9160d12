"""Backend selection for the hot moment kernels.

The compiled Cython extension is preferred; the NumPy fallback is used
when the extension is missing or ``NCENOISE_PURE_PYTHON=1``.
``BACKEND`` names the active implementation.
"""

import os

from . import _fallback

if os.environ.get("NCENOISE_PURE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "numpy"

weighted_moments = _impl.weighted_moments
moment_partials = _impl.moment_partials

__all__ = ["weighted_moments", "moment_partials", "BACKEND"]
