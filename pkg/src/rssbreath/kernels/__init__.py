"""Per-window numeric kernels with a compiled fast path.

The Cython extension is used when importable; set ``RSSBREATH_PURE_PYTHON=1``
to force the NumPy fallback. Both backends implement the same functions with
identical semantics, so everything above this layer is backend-agnostic.
"""

import os

from . import _reference

if os.environ.get("RSSBREATH_PURE_PYTHON") == "1":
    _impl = _reference
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _reference
        BACKEND = "python"

sum_power = _impl.sum_power
link_power = _impl.link_power
t_score_matrix = _impl.t_score_matrix

__all__ = ["BACKEND", "sum_power", "link_power", "t_score_matrix"]
