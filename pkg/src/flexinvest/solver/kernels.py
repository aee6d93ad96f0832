"""Select the simplex kernel backend at import time.

The compiled Cython extension is used when it was built; otherwise the numpy
fallback. ``FLEXINVEST_KERNELS=python`` forces the fallback.
"""
import os

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

_forced = os.environ.get("FLEXINVEST_KERNELS", "").strip().lower()
if _forced and _forced not in BACKENDS:
    raise ImportError(f"FLEXINVEST_KERNELS={_forced!r} not available; have {sorted(BACKENDS)}")
DEFAULT_BACKEND = _forced or ("compiled" if _compiled is not None else "python")


def get_kernels(name=None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} not available; have {sorted(BACKENDS)}") from None
