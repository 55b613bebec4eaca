"""Curve arithmetic kernel with compiled and pure-Python implementations.

The compiled extension (Cython, 64-bit limb field arithmetic) is used
when available; otherwise the pure-Python implementation takes over with
the exact same API. Set MIXROUTE_PURE=1 to force the fallback, e.g. for
the backend benchmark or to rule the extension out when debugging.

Exported API (identical across backends):
    point_add(P, Q)   affine points as (x, y) tuples, None = identity
    point_mul(P, k)   scalar multiplication, k >= 0
    P_FIELD, ORDER, GX, GY
    BACKEND           "compiled" or "pure"
"""

import os

if os.environ.get("MIXROUTE_PURE"):
    from mixroute._kernel import pure as _impl

    BACKEND = "pure"
else:
    try:
        from mixroute._kernel import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from mixroute._kernel import pure as _impl

        BACKEND = "pure"

point_add = _impl.point_add
point_mul = _impl.point_mul
P_FIELD = _impl.P_FIELD
ORDER = _impl.ORDER
GX = _impl.GX
GY = _impl.GY
