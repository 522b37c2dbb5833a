"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy implementation in ``_pykernels`` takes over. Set ``WEYLSIMPLEX_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _pykernels

python_backend = _pykernels

if os.environ.get("WEYLSIMPLEX_PURE_PYTHON") == "1":
    compiled_backend = None
else:
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = backend.BACKEND

mphi = backend.mphi
mphi_min_eig = backend.mphi_min_eig
alternating_descent = backend.alternating_descent
product_overlaps = backend.product_overlaps
convolve_phase = backend.convolve_phase
