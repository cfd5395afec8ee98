"""Reconstruction kernel dispatch.

The hot WENO5 loops exist twice: a compiled Cython extension and a
pure-NumPy fallback.  The extension is preferred when importable; setting
``TTWENO_PURE_PYTHON=1`` forces the fallback (used by the kernel benchmark
and by CI environments without a compiler).
"""

import os

from . import _weno_np

if os.environ.get("TTWENO_PURE_PYTHON", "").strip() in ("1", "true", "yes"):
    _active = _weno_np
else:
    try:
        from . import _weno_cy as _active  # type: ignore[attr-defined]
    except ImportError:
        _active = _weno_np

IMPL = _active.IMPL
weno5_lines = _active.weno5_lines
weno5_points = _active.weno5_points


def implementations():
    """All importable kernel backends, keyed by name (for benchmarks/tests)."""
    impls = {"numpy": _weno_np}
    try:
        from . import _weno_cy

        impls["cython"] = _weno_cy
    except ImportError:
        pass
    return impls
