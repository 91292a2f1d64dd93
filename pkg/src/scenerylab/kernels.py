"""Kernel backend selection.

The compiled extension is used when it imports; ``SCENERYLAB_PURE_PYTHON=1``
forces the numpy fallback.  ``BACKEND`` names the active choice.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SCENERYLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

multispectrum_dfs = _impl.multispectrum_dfs
walk_positions = _impl.walk_positions
alias_sample = _impl.alias_sample
lag_batch_sums = _impl.lag_batch_sums

__all__ = ["BACKEND", "multispectrum_dfs", "walk_positions", "alias_sample", "lag_batch_sums"]
