"""Select the inner-loop kernel at import time.

The compiled extension is preferred when it built; set HBFSIM_BACKEND=python
to force the numpy fallback or HBFSIM_BACKEND=c to hard-require the
extension (useful in benchmarks and backend-equivalence tests).
"""

import os

_requested = os.environ.get("HBFSIM_BACKEND", "").strip().lower()
if _requested not in ("", "c", "python"):
    raise RuntimeError(f"HBFSIM_BACKEND must be 'c' or 'python', got {_requested!r}")

if _requested == "python":
    from . import _altmin_py as _impl
else:
    try:
        from . import _altmin_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "c":
            raise
        from . import _altmin_py as _impl

altmin_loop = _impl.altmin_loop
BACKEND = _impl.BACKEND


def backend_name() -> str:
    """Either 'c' (compiled extension) or 'python' (numpy fallback)."""
    return BACKEND
