"""Hot numerical kernels with a compiled core and a pure-NumPy fallback.

The Cython extension ``_core`` is used when it was built; otherwise (or
when the environment variable ``HDMDC_PURE`` is set) the ``pure`` module
takes over.  Both expose the same functions with identical semantics, so
everything above this package is backend-agnostic.
"""

from __future__ import annotations

import os

from . import pure as _pure

if os.environ.get("HDMDC_PURE"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

rollout_batch = _impl.rollout_batch
kde_eval = _impl.kde_eval


def backends() -> dict:
    """Available backend modules keyed by name (for tests and benchmarks)."""
    found = {"pure": _pure}
    try:
        from . import _core

        found["compiled"] = _core
    except ImportError:
        pass
    return found
