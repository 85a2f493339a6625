"""Kernel selection: compiled core when available, numpy fallback otherwise.

Set CHIRAL_KERNEL=fallback (or =native) to force a specific
implementation; forcing native raises if the extension is missing.
"""

import os

from . import _fallback

_requested = os.environ.get("CHIRAL_KERNEL", "").strip().lower()

if _requested == "fallback":
    _impl = _fallback
else:
    try:
        from . import _native as _impl
    except ImportError:
        if _requested == "native":
            raise
        _impl = _fallback

nsoliton_points = _impl.nsoliton_points
KERNEL = "native" if _impl is not _fallback else "fallback"

fallback_points = _fallback.nsoliton_points

try:
    from . import _native

    native_points = _native.nsoliton_points
    HAVE_NATIVE = True
except ImportError:
    native_points = None
    HAVE_NATIVE = False
