"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``PHOTONKIN_PURE_PYTHON=1``
to force the NumPy fallback.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("PHOTONKIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "compiled" if compiled_backend is not None else "python"

rk4_driven = backend.rk4_driven
spin1_ordered_product = backend.spin1_ordered_product
