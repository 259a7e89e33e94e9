"""Backend selection for the inner loops.

The compiled module ``_ckernels`` is preferred; set ``TORUSWIND_PURE=1`` to
force the numpy fallback. ``BACKEND`` names the active one.
"""
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("TORUSWIND_PURE") == "1":
        raise ImportError("pure backend requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def winding_integral(P, Q, h):
    """(1/2π)·periodic-Simpson integral of det(V, V')/|V|², and min |V|."""
    return _impl.winding_integral(np.ascontiguousarray(P, dtype=float), np.ascontiguousarray(Q, dtype=float), float(h))


def unwrap_total(theta):
    """Sum of consecutive angle increments folded into [-π, π), and the largest |increment|."""
    return _impl.unwrap_total(np.ascontiguousarray(theta, dtype=float))


def cumulative_simpson(F, M, dx, anchor):
    """Row-wise cumulative Simpson integral from column ``anchor`` (value 0 there)."""
    return np.asarray(
        _impl.cumulative_simpson(
            np.ascontiguousarray(F, dtype=float), np.ascontiguousarray(M, dtype=float), float(dx), int(anchor)
        )
    )


def backends():
    """Mapping of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
