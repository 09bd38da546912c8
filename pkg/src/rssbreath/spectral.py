"""Window mean removal and direct evaluation of single-frequency signal power."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Uniformly spaced candidate frequencies spanning [f_min, f_max], in Hz.

    Both endpoints are always on the grid; f_max is appended when the span is
    not an exact multiple of the step.
    """

    f_min: float
    f_max: float
    step: float = 0.002
    frequencies: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.f_min < self.f_max:
            raise ConfigurationError(
                f"need 0 < f_min < f_max, got [{self.f_min}, {self.f_max}]"
            )
        if self.step <= 0.0:
            raise ConfigurationError(f"grid step must be positive, got {self.step}")
        count = int(np.floor((self.f_max - self.f_min) / self.step + 1e-9))
        freqs = self.f_min + self.step * np.arange(count + 1)
        if freqs[-1] < self.f_max - 1e-12:
            freqs = np.append(freqs, self.f_max)
        object.__setattr__(self, "frequencies", freqs)

    def __len__(self) -> int:
        return self.frequencies.shape[0]

    def validate_nyquist(self, sample_period: float) -> None:
        """Reject the grid if f_max is not below the Nyquist rate for this period."""
        nyquist = 0.5 / sample_period
        if self.f_max >= nyquist:
            raise ConfigurationError(
                f"f_max {self.f_max} Hz must be below the Nyquist rate "
                f"{nyquist:.4f} Hz for sampling period {sample_period} s"
            )


def window_mean(values) -> float:
    """Arithmetic mean of a window of samples."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ConfigurationError("cannot average an empty window")
    return float(v.mean())


def remove_mean_basic(values) -> np.ndarray:
    """Subtract the window mean along the last axis.

    Accepts a single series (N,) or a per-link matrix (L, N); the output sums
    to zero along the last axis up to roundoff.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.shape[-1] == 0:
        raise ConfigurationError("cannot remove the mean of an empty window")
    return v - v.mean(axis=-1, keepdims=True)


def phase_tables(frequencies, n_samples: int, sample_period: float):
    """Cosine and sine tables of shape (F, N) for window-relative indices.

    The tables feed the kernels: power at frequency f is
    (y . cos_f)^2 + (y . sin_f)^2, identical to the squared magnitude of the
    complex exponential sum.
    """
    ang = (
        2.0
        * np.pi
        * np.asarray(frequencies, dtype=np.float64)[:, None]
        * sample_period
        * np.arange(n_samples)[None, :]
    )
    return np.ascontiguousarray(np.cos(ang)), np.ascontiguousarray(np.sin(ang))


def psd_at(y, f: float, sample_period: float, start_index: int = 0) -> float:
    """Signal power |sum_n y[n] e^(-j 2 pi f T n)|^2 at one frequency.

    The complex sum uses absolute sample indices n = start_index .. +N-1; the
    returned squared magnitude is invariant to start_index, which only rotates
    the phase of the complex intermediate.
    """
    y = np.asarray(y, dtype=np.float64)
    if not np.isfinite(y).all():
        raise ConfigurationError("samples must be finite")
    if f < 0.0:
        raise ConfigurationError(f"frequency must be nonnegative, got {f}")
    n = start_index + np.arange(y.shape[-1])
    z = np.exp(-2j * np.pi * f * sample_period * n) @ y
    return float(z.real * z.real + z.imag * z.imag)


def sum_psd(ys, grid: FrequencyGrid, sample_period: float) -> np.ndarray:
    """Per-frequency power summed over links: spectrum[f] = sum_l psd_at(y_l, f)."""
    y = np.ascontiguousarray(np.atleast_2d(np.asarray(ys, dtype=np.float64)))
    if y.shape[0] == 0 or y.size == 0:
        raise ConfigurationError("need at least one link with samples")
    cos_tab, sin_tab = phase_tables(grid.frequencies, y.shape[1], sample_period)
    return kernels.sum_power(y, cos_tab, sin_tab)
