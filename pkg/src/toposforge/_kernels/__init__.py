"""Kernel backend selection.

The permutation kernels exist twice: a compiled Cython module (_fast) and a
pure-Python twin (pure) with the identical contract.  The compiled one wins
when it imported cleanly; TOPOSFORGE_PURE=1 forces the fallback.
"""

import os

if os.environ.get("TOPOSFORGE_PURE", "") == "1":
    from . import pure as _backend

    BACKEND = "pure"
else:
    try:
        from . import _fast as _backend  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import pure as _backend

        BACKEND = "pure"

identity = _backend.identity
compose = _backend.compose
invert = _backend.invert
close = _backend.close
closed_walk_perms = _backend.closed_walk_perms


def backend() -> str:
    """Name of the active kernel backend ("compiled" or "pure")."""
    return BACKEND
