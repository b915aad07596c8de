"""Distance-kernel backend selection.

Two interchangeable backends implement the same kernel functions: a Cython
extension (``_ckern``) and a numpy fallback (``_py``).  The compiled one is
preferred when importable; ``EPSGRAPH_KERNELS=python`` or ``=compiled``
forces a choice.  ``active`` holds the backend module in use; the metric
layer dispatches through it on every call, so benchmarks and tests can
switch with :func:`use_backend`.
"""

from __future__ import annotations

import os

from . import _py

try:
    from . import _ckern
except ImportError:  # extension not built; fallback stays available
    _ckern = None

BACKENDS = {"python": _py}
if _ckern is not None:
    BACKENDS["compiled"] = _ckern

_requested = os.environ.get("EPSGRAPH_KERNELS", "auto").lower()
if _requested == "auto":
    active = _ckern if _ckern is not None else _py
elif _requested in ("compiled", "c"):
    if _ckern is None:
        raise ImportError(
            "EPSGRAPH_KERNELS=compiled but the epsgraph._kernels._ckern "
            "extension is not built"
        )
    active = _ckern
elif _requested in ("python", "py"):
    active = _py
else:
    raise ImportError(f"unknown EPSGRAPH_KERNELS value: {_requested!r}")


def backend_name() -> str:
    """Name of the backend currently in use."""
    return "compiled" if active is _ckern and _ckern is not None else "python"


def use_backend(name: str):
    """Switch the active backend; returns the previous module (for restore)."""
    global active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable (have {sorted(BACKENDS)})")
    prev = active
    active = BACKENDS[name]
    return prev
