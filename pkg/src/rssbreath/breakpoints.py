"""Mean-shift (motion) detection via the group t-test, and piecewise mean removal.

Sudden movement shifts the mean RSS of many links at once. Indices where the
RMS of per-link group t-scores crosses a threshold become breakpoints, and the
window mean model turns piecewise constant between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import RssFrame
from .errors import ConfigurationError


@dataclass(frozen=True)
class TTestParams:
    """Group t-test parameters: group size q, denominator floor, RMS threshold."""

    q: int = 14
    epsilon: float = 0.5
    gamma: float = 0.8

    def __post_init__(self):
        if self.q < 2:
            raise ConfigurationError(f"group size must be at least 2, got {self.q}")
        if self.epsilon <= 0.0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if self.gamma <= 0.0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class BreakpointSet:
    """Breakpoints for one window, in absolute sample indices.

    The window start and end are always breakpoints; ``interior`` holds the
    detected mean-shift indices strictly inside them. Each interior breakpoint
    is the first sample of a new segment. ``rms_trace`` keeps the per-index RMS
    t-score (NaN where two full groups did not fit).
    """

    start: int
    end: int
    interior: tuple[int, ...] = ()
    rms_trace: np.ndarray | None = None
    too_short: bool = False

    def __post_init__(self):
        if self.end <= self.start:
            raise ConfigurationError("window end must come after its start")
        inner = tuple(int(b) for b in self.interior)
        if list(inner) != sorted(set(inner)):
            raise ConfigurationError("interior breakpoints must be sorted and unique")
        if inner and (inner[0] <= self.start or inner[-1] >= self.end):
            raise ConfigurationError("interior breakpoints must lie strictly inside the window")
        object.__setattr__(self, "interior", inner)

    def segments(self) -> list[tuple[int, int]]:
        """Inclusive [a, b] absolute index runs; each interior breakpoint opens one."""
        bounds = [self.start, *self.interior, self.end + 1]
        return [(bounds[k], bounds[k + 1] - 1) for k in range(len(bounds) - 1)]


def t_score(values, index: int, params: TTestParams) -> float:
    """Group t-score at ``index`` of a raw RSS series.

    Compares the mean of the q samples before the index against the q samples
    starting at it, normalized by the floored pooled spread. Returns NaN when
    either group would extend outside the series.
    """
    v = np.asarray(values, dtype=np.float64)
    q = params.q
    if index - q < 0 or index + q > v.shape[0]:
        return math.nan
    before = v[index - q : index]
    after = v[index : index + q]
    num = before.mean() - after.mean()
    den = max(params.epsilon, math.sqrt((before.var(ddof=1) + after.var(ddof=1)) / q))
    return float(num / den)


def rms_t_score(scores) -> float:
    """Root-mean-square of the computable (non-NaN) per-link t-scores."""
    s = np.asarray(scores, dtype=np.float64)
    ok = np.isfinite(s)
    if not ok.any():
        return math.nan
    return float(np.sqrt(np.mean(s[ok] ** 2)))


def detect_breakpoints(frame: RssFrame, params: TTestParams) -> BreakpointSet:
    """Detect mean-shift indices in a frame from the RMS t-score trace.

    Interior breakpoints are exactly the indices whose RMS t-score reaches
    gamma; runs of consecutive detections are kept as-is. Indices within q of
    either window edge cannot host two full groups and are never breakpoints.
    A frame shorter than 2q yields only the start/end pair, flagged too_short.
    """
    tau = kernels.t_score_matrix(np.ascontiguousarray(frame.values), params.q, params.epsilon)
    ok = np.isfinite(tau)
    counts = ok.sum(axis=0)
    sq = np.where(ok, tau * tau, 0.0).sum(axis=0)
    trace = np.full(frame.length, np.nan)
    valid = counts > 0
    trace[valid] = np.sqrt(sq[valid] / counts[valid])
    hits = np.nonzero(valid & (trace >= params.gamma))[0]
    interior = tuple(int(frame.start + j) for j in hits)
    return BreakpointSet(
        start=frame.start,
        end=frame.end,
        interior=interior,
        rms_trace=trace,
        too_short=frame.length < 2 * params.q,
    )


def remove_mean_breakpoint(values, bps: BreakpointSet) -> np.ndarray:
    """Subtract the mean of each inter-breakpoint segment.

    ``values`` is a window (N,) or (L, N) whose last axis spans exactly
    ``bps.start .. bps.end``. Within every segment the output sums to zero;
    single-sample segments come out exactly zero. With no interior breakpoints
    this reduces to plain window mean removal.
    """
    v = np.asarray(values, dtype=np.float64)
    n = bps.end - bps.start + 1
    if v.shape[-1] != n:
        raise ConfigurationError(
            f"window of {v.shape[-1]} samples does not span breakpoint range of {n}"
        )
    out = np.empty_like(v)
    for a, b in bps.segments():
        ra, rb = a - bps.start, b - bps.start + 1
        seg = v[..., ra:rb]
        out[..., ra:rb] = seg - seg.mean(axis=-1, keepdims=True)
    return out
