"""Selects the kernel backend at import time.

The compiled extension is preferred when present; the numpy fallback is
numerically identical, just slower. PARARANK_KERNELS=py|cy|auto overrides
(cy fails loudly when the extension is missing, for CI parity checks).
"""

from __future__ import annotations

import os

from . import _kernels_py

_CHOICE = os.environ.get("PARARANK_KERNELS", "auto").lower()
if _CHOICE not in ("auto", "py", "cy"):
    raise ImportError(f"PARARANK_KERNELS must be auto, py or cy, got {_CHOICE!r}")

if _CHOICE == "py":
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        if _CHOICE == "cy":
            raise
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
scan_split = _impl.scan_split
route_rows = _impl.route_rows


def available_backends() -> dict[str, object]:
    """All importable kernel modules, for parity tests and benchmarks."""
    found: dict[str, object] = {"py": _kernels_py}
    try:
        from . import _kernels_cy
        found["cy"] = _kernels_cy
    except ImportError:
        pass
    return found
