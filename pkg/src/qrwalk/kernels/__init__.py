"""Walk kernel backend selection.

The compiled Cython kernel is used when its extension module importable;
otherwise the pure-Python twin takes over. Both produce bit-identical
results for the same seeds, so the choice only affects speed. Set
QRWALK_PURE=1 to force the pure backend (used by the benchmark and the
cross-backend equality tests).
"""

from __future__ import annotations

import os

if os.environ.get("QRWALK_PURE"):
    from . import _walk_py as _impl
else:
    try:
        from . import _walk_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _walk_py as _impl

BACKEND = _impl.BACKEND_NAME

derive_seed2 = _impl.derive_seed2
stream_doubles = _impl.stream_doubles
step_once = _impl.step_once
walk_once = _impl.walk_once
estimate_component = _impl.estimate_component
sample_histogram = _impl.sample_histogram
