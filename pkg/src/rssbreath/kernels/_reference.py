"""NumPy implementations of the per-window kernels.

Same contracts as the compiled versions in ``_speedups.pyx``; selected
automatically when the extension is unavailable or when the environment
variable ``RSSBREATH_PURE_PYTHON=1`` is set.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def sum_power(y, cos_tab, sin_tab):
    """Power summed over links at each tabulated frequency.

    y is (L, N) mean-removed samples; cos_tab and sin_tab are (F, N) phase
    tables. Returns (F,) with sum_l [(y_l . cos_f)^2 + (y_l . sin_f)^2].
    """
    re = y @ cos_tab.T
    im = y @ sin_tab.T
    return (re * re + im * im).sum(axis=0)


def link_power(y, cos_row, sin_row):
    """Per-link power at a single frequency; returns (L,)."""
    re = y @ cos_row
    im = y @ sin_row
    return re * re + im * im


def t_score_matrix(r, q, epsilon):
    """Group t-scores for every link and window index.

    r is (L, N) raw RSS. Entry [l, n] compares the q samples before index n
    against the q samples starting at n, normalizing the mean difference by
    the floored pooled spread. Indices without two full groups are NaN.
    """
    r = np.ascontiguousarray(r, dtype=np.float64)
    n_links, n = r.shape
    out = np.full((n_links, n), np.nan)
    if n < 2 * q:
        return out
    win = sliding_window_view(r, q, axis=1)
    means = win.mean(axis=-1)
    varis = win.var(axis=-1, ddof=1)
    idx = np.arange(q, n - q + 1)
    num = means[:, idx - q] - means[:, idx]
    den = np.maximum(epsilon, np.sqrt((varis[:, idx - q] + varis[:, idx]) / q))
    out[:, idx] = num / den
    return out
