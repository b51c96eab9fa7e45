"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
twin. Setting ``RATEROUTE_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("RATEROUTE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        pass

shortest_path_tree = _impl.shortest_path_tree
oracle_scan = _impl.oracle_scan


def get_backend(name=None):
    """Module implementing the kernels for ``name`` (``"python"``, ``"cython"``,
    or ``None`` for the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
