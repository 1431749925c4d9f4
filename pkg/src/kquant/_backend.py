"""Backend selection for the DP kernel.

The compiled Cython extension is preferred when importable; the NumPy
implementation is the fallback.  ``KQUANT_BACKEND=python|cython`` forces a
choice at import time (``cython`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _core_py

_FORCED = os.environ.get("KQUANT_BACKEND", "").strip().lower()

if _FORCED == "python":
    _impl = _core_py
elif _FORCED == "cython":
    from . import _core as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _core_py

dp_cost_table = _impl.dp_cost_table


def backend_name() -> str:
    """Name of the active DP backend ("cython" or "python")."""
    return _impl.BACKEND_NAME


def available_backends() -> dict:
    """Importable backend modules keyed by name (for benchmarks and parity tests)."""
    found = {"python": _core_py}
    try:
        from . import _core
        found["cython"] = _core
    except ImportError:
        pass
    return found
