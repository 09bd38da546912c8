"""Sliding-window breathing rate estimation, smoothing, and evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .breakpoints import TTestParams, detect_breakpoints, remove_mean_breakpoint
from .core import LinkKey, extract_frame_from_matrix, fill_forward, RssFrame
from .errors import ConfigurationError, DataError, EmptyFrameError
from .spectral import FrequencyGrid, phase_tables, remove_mean_basic

METHODS = ("basic", "breakpoint")

# Estimates within this many bpm of truth count as acceptable.
ACCEPTABLE_BPM = 3.0
# Estimates below this rate are tallied as suspect (near the railing floor).
LOW_RATE_BPM = 9.0


@dataclass(frozen=True)
class EstimatorConfig:
    """Window, band, grid, t-test, hop, and smoothing settings."""

    window_samples: int = 70
    f_min_hz: float = 0.1
    f_max_hz: float = 0.4
    grid_step_hz: float = 0.002
    ttest: TTestParams = TTestParams()
    hop_s: float = 5.0
    median_span_s: float = 90.0

    def __post_init__(self):
        if self.window_samples < 2:
            raise ConfigurationError("window must hold at least 2 samples")
        if self.hop_s <= 0.0:
            raise ConfigurationError(f"hop must be positive, got {self.hop_s}")
        if self.median_span_s <= 0.0:
            raise ConfigurationError(f"median span must be positive, got {self.median_span_s}")
        self.frequency_grid()  # validates band and step

    def frequency_grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.f_min_hz, self.f_max_hz, self.grid_step_hz)

    def hop_samples(self, sample_period: float) -> int:
        return max(1, int(round(self.hop_s / sample_period)))


@dataclass(frozen=True, eq=False)
class RateEstimate:
    """One window's estimate: peak frequency, motion flag, and per-link power.

    ``v`` holds each included link's signal power at the estimated frequency,
    aligned with ``links``; it is the input vector for breathing imaging.
    """

    f_hat_hz: float
    method: str
    motion_detected: bool
    v: np.ndarray
    links: tuple[LinkKey, ...]
    window_end_index: int
    time_s: float
    degenerate: bool = False

    @property
    def bpm(self) -> float:
        return 60.0 * self.f_hat_hz


def estimate_rate(
    frame: RssFrame,
    sample_period: float,
    config: EstimatorConfig,
    method: str = "breakpoint",
    _tables=None,
) -> RateEstimate:
    """Estimate the breathing frequency for one frame.

    The mean-removed signal is the grid frequency maximizing the power summed
    over links; ties break toward the lowest frequency. The breakpoint method
    removes piecewise means between detected motion breakpoints and flags
    motion when any interior breakpoint exists. A frame whose mean-removed
    signal is identically zero is flagged degenerate and reported at f_min
    with the motion flag set.
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}, expected one of {METHODS}")
    grid = config.frequency_grid()
    grid.validate_nyquist(sample_period)
    if method == "breakpoint":
        bps = detect_breakpoints(frame, config.ttest)
        y = remove_mean_breakpoint(frame.values, bps)
        motion = bool(bps.interior)
    else:
        y = remove_mean_basic(frame.values)
        motion = False
    y = np.ascontiguousarray(y)
    time_s = frame.end * sample_period
    if not y.any():
        return RateEstimate(
            f_hat_hz=float(grid.frequencies[0]),
            method=method,
            motion_detected=True,
            v=np.zeros(len(frame.links)),
            links=frame.links,
            window_end_index=frame.end,
            time_s=time_s,
            degenerate=True,
        )
    if _tables is None:
        _tables = phase_tables(grid.frequencies, frame.length, sample_period)
    cos_tab, sin_tab = _tables
    spectrum = kernels.sum_power(y, cos_tab, sin_tab)
    k = int(np.argmax(spectrum))
    v = kernels.link_power(y, cos_tab[k], sin_tab[k])
    return RateEstimate(
        f_hat_hz=float(grid.frequencies[k]),
        method=method,
        motion_detected=motion,
        v=v,
        links=frame.links,
        window_end_index=frame.end,
        time_s=time_s,
    )


def sliding_estimates(
    links: tuple[LinkKey, ...],
    values: np.ndarray,
    sample_period: float,
    config: EstimatorConfig,
    method: str = "breakpoint",
) -> list[RateEstimate]:
    """Estimate each window of the trace at the configured hop.

    ``values`` is the stacked (n_links, n_samples) raw matrix with NaN for
    missing samples. Windows where no link has enough samples are skipped.
    """
    n = values.shape[1]
    big_n = config.window_samples
    if n < big_n:
        raise EmptyFrameError(f"trace has {n} samples but the window needs {big_n}")
    grid = config.frequency_grid()
    grid.validate_nyquist(sample_period)
    tables = phase_tables(grid.frequencies, big_n, sample_period)
    filled = fill_forward(values)
    out = []
    for i in range(big_n - 1, n, config.hop_samples(sample_period)):
        try:
            frame = extract_frame_from_matrix(links, values, i, big_n, filled=filled)
        except EmptyFrameError:
            continue
        out.append(estimate_rate(frame, sample_period, config, method, _tables=tables))
    return out


def median_smooth(times, values, span_s: float = 90.0) -> np.ndarray:
    """Centered running median over a fixed time span.

    Each output is the median of all values whose times fall within +-span/2
    of the current time; at the edges the span truncates to what exists.
    """
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.size == 0:
        raise DataError("no estimates to smooth")
    if t.shape != v.shape:
        raise DataError("times and values must have matching shapes")
    if np.any(np.diff(t) < 0):
        raise DataError("times must be nondecreasing")
    half = span_s / 2.0
    lo = np.searchsorted(t, t - half, side="left")
    hi = np.searchsorted(t, t + half, side="right")
    out = np.empty_like(v)
    for k in range(t.size):
        out[k] = np.median(v[lo[k] : hi[k]])
    return out


@dataclass(frozen=True)
class RateMetrics:
    """Evaluation summary for a series of rate estimates.

    Truth-based fields are None when no ground-truth rate was supplied.
    """

    n_windows: int
    acceptable_fraction: float | None
    mean_abs_error_bpm: float | None
    rms_median_bpm: float
    low_count: int
    low_motion_count: int
    low_still_count: int

    def as_dict(self) -> dict:
        return {
            "n_windows": self.n_windows,
            "acceptable_fraction": self.acceptable_fraction,
            "mean_abs_error_bpm": self.mean_abs_error_bpm,
            "rms_median_bpm": self.rms_median_bpm,
            "low_count": self.low_count,
            "low_motion_count": self.low_motion_count,
            "low_still_count": self.low_still_count,
        }


def evaluate_rate_arrays(
    times,
    bpm,
    motion,
    truth_bpm: float | None = None,
    median_span_s: float = 90.0,
    median_bpm=None,
) -> RateMetrics:
    """Metrics from plain arrays (used directly by the CLI on loaded CSVs)."""
    t = np.asarray(times, dtype=np.float64)
    b = np.asarray(bpm, dtype=np.float64)
    m = np.asarray(motion, dtype=bool)
    if t.size == 0:
        raise DataError("no estimates to evaluate")
    if median_bpm is None:
        median_bpm = median_smooth(t, b, median_span_s)
    med = np.asarray(median_bpm, dtype=np.float64)
    rms_median = float(np.sqrt(np.mean((b - med) ** 2)))
    low = b < LOW_RATE_BPM
    acceptable = mean_err = None
    if truth_bpm is not None:
        err = np.abs(b - truth_bpm)
        acceptable = float(np.mean(err <= ACCEPTABLE_BPM))
        mean_err = float(err.mean())
    return RateMetrics(
        n_windows=int(t.size),
        acceptable_fraction=acceptable,
        mean_abs_error_bpm=mean_err,
        rms_median_bpm=rms_median,
        low_count=int(low.sum()),
        low_motion_count=int((low & m).sum()),
        low_still_count=int((low & ~m).sum()),
    )


def evaluate_rates(
    estimates: Sequence[RateEstimate],
    truth_bpm: float | None = None,
    median_span_s: float = 90.0,
) -> RateMetrics:
    """Metrics for a time-ordered series of estimates.

    With truth: fraction of estimates within the acceptability band and the
    mean absolute error, both in bpm. Always: the RMS deviation from the
    centered running median, and counts of low estimates split by the motion
    flag.
    """
    if not estimates:
        raise DataError("no estimates to evaluate")
    times = [e.time_s for e in estimates]
    bpm = [e.bpm for e in estimates]
    motion = [e.motion_detected for e in estimates]
    return evaluate_rate_arrays(times, bpm, motion, truth_bpm, median_span_s)
