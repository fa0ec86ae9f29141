"""Hot loops, compiled when the extension is built, numpy otherwise.

Set ``OPGYRO_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

try:
    from . import _rk4 as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

if _compiled is not None and not os.environ.get("OPGYRO_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

rk4_evolve = BACKENDS[BACKEND].rk4_evolve

__all__ = ["BACKEND", "BACKENDS", "rk4_evolve"]
