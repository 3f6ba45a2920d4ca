"""Kernel backend selection: compiled extension when available, numpy
fallback otherwise.  Set MWLAB_FORCE_PY=1 to force the fallback (used by the
benchmark and in tests comparing the two)."""

import os

from . import _kernels_py

if os.environ.get("MWLAB_FORCE_PY"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

tree_max_avg = _impl.tree_max_avg
pair_opnorm = _impl.pair_opnorm
cg_values = _impl.cg_values
ancestor_max_mean_rows = _impl.ancestor_max_mean_rows
ellip_max_norm = _impl.ellip_max_norm


def backend_name():
    return "cython" if _impl.__name__.endswith("_kernels") else "numpy"
