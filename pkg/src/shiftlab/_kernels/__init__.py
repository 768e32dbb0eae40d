"""Hot loops, compiled when the Cython extension is built, numpy otherwise.

Set ``SHIFTLAB_PURE=1`` to force the numpy implementation.
"""

import os

from . import _pykernels as pure

compiled = None
if os.environ.get("SHIFTLAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

backend = compiled if compiled is not None else pure
BACKEND_NAME = "cython" if compiled is not None else "numpy"

window_extrema = backend.window_extrema
orbit_deviation = backend.orbit_deviation
orbit_visit_mask = backend.orbit_visit_mask

__all__ = [
    "BACKEND_NAME",
    "compiled",
    "pure",
    "window_extrema",
    "orbit_deviation",
    "orbit_visit_mask",
]
