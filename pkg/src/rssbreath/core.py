"""Domain types for nodes, links, and windowed RSS sample extraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, EmptyFrameError


@dataclass(frozen=True)
class NodeGeometry:
    """A transceiver node with a fixed 2-D position in meters."""

    node_id: int
    position: tuple[float, float]

    def __post_init__(self):
        x, y = self.position
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ConfigurationError(
                f"node {self.node_id} has non-finite position {self.position!r}"
            )
        object.__setattr__(self, "position", (float(x), float(y)))


@dataclass(frozen=True)
class LinkKey:
    """One logical link: an ordered (tx, rx) node pair on one frequency channel."""

    tx: int
    rx: int
    channel: int = 0

    def __post_init__(self):
        if self.tx == self.rx:
            raise ConfigurationError(f"link cannot loop back to its own node ({self.tx})")
        if self.channel < 0:
            raise ConfigurationError(f"channel index must be nonnegative, got {self.channel}")


def enumerate_links(n_nodes: int, n_channels: int) -> list[LinkKey]:
    """All ordered node pairs on every channel, in channel-major (then tx, rx) order.

    The count is always n_channels * n_nodes * (n_nodes - 1); this fixed order
    defines the row indexing used by every matrix in the pipeline.
    """
    if n_nodes < 2:
        raise ConfigurationError(f"need at least 2 nodes, got {n_nodes}")
    if n_channels < 1:
        raise ConfigurationError(f"need at least 1 channel, got {n_channels}")
    return [
        LinkKey(tx, rx, ch)
        for ch in range(n_channels)
        for tx in range(n_nodes)
        for rx in range(n_nodes)
        if tx != rx
    ]


@dataclass(frozen=True, eq=False)
class RssSeries:
    """Uniformly sampled RSS values in dB for one link; NaN marks missing samples."""

    link: LinkKey
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ConfigurationError("RSS series must be one-dimensional")
        if np.isinf(v).any():
            raise ConfigurationError("RSS values must be finite (use NaN for missing)")
        object.__setattr__(self, "values", v)

    @property
    def mask(self) -> np.ndarray:
        """Boolean array, True where a sample is present."""
        return np.isfinite(self.values)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class RssFrame:
    """An aligned window of raw RSS samples, one row per included link.

    ``values[j]`` holds the samples of ``links[j]`` at absolute indices
    ``start .. start + length - 1``, with missing samples already filled.
    """

    start: int
    length: int
    links: tuple[LinkKey, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.length < 2:
            raise ConfigurationError("frame length must be at least 2")
        if self.values.shape != (len(self.links), self.length):
            raise ConfigurationError(
                f"frame values shape {self.values.shape} does not match "
                f"{len(self.links)} links x {self.length} samples"
            )

    @property
    def end(self) -> int:
        return self.start + self.length - 1


def stack_series(series_set: Sequence[RssSeries]) -> tuple[tuple[LinkKey, ...], np.ndarray]:
    """Stack per-link series into one (n_links, n_samples) matrix, NaN-padded."""
    if not series_set:
        raise ConfigurationError("no series given")
    n = max(len(s) for s in series_set)
    out = np.full((len(series_set), n), np.nan)
    for j, s in enumerate(series_set):
        out[j, : len(s)] = s.values
    return tuple(s.link for s in series_set), out


def fill_forward(values: np.ndarray) -> np.ndarray:
    """Replace NaNs with the most recent preceding finite value, per row.

    Leading NaNs (before the first finite sample of a row) are left in place.
    """
    v = np.asarray(values, dtype=np.float64)
    mask = np.isfinite(v)
    if mask.all():
        return v.copy()
    idx = np.where(mask, np.arange(v.shape[1]), 0)
    np.maximum.accumulate(idx, axis=1, out=idx)
    return v[np.arange(v.shape[0])[:, None], idx]


def extract_frame_from_matrix(
    links: tuple[LinkKey, ...],
    values: np.ndarray,
    end_index: int,
    length: int,
    filled: np.ndarray | None = None,
) -> RssFrame:
    """Extract an aligned window ending at ``end_index`` from a stacked matrix.

    Links with fewer than length/2 present samples in the window are dropped.
    ``filled`` may pass a precomputed :func:`fill_forward` of ``values`` so a
    sliding sweep fills once instead of per window.
    """
    if length < 2:
        raise ConfigurationError("frame length must be at least 2")
    n_samples = values.shape[1]
    if end_index < length - 1 or end_index >= n_samples:
        raise EmptyFrameError(
            f"window ending at {end_index} with length {length} does not fit "
            f"a trace of {n_samples} samples"
        )
    start = end_index - length + 1
    present = np.isfinite(values[:, start : end_index + 1])
    include = 2 * present.sum(axis=1) >= length
    if not include.any():
        raise EmptyFrameError(f"no link has enough samples in window {start}..{end_index}")
    if filled is None:
        filled = fill_forward(values)
    window = filled[:, start : end_index + 1]
    if include.all():
        kept_links = links
        kept = window.copy()
    else:
        kept_links = tuple(lk for lk, inc in zip(links, include) if inc)
        kept = window[include].copy()
    # A row can still lead with NaN when the window starts before the first
    # sample the link ever reported; backfill those few slots within the window.
    gaps = ~np.isfinite(kept)
    if gaps.any():
        for row in np.nonzero(gaps.any(axis=1))[0]:
            first = np.nonzero(np.isfinite(kept[row]))[0][0]
            kept[row, :first] = kept[row, first]
    return RssFrame(start=start, length=length, links=kept_links, values=kept)


def extract_frame(series_set: Sequence[RssSeries], end_index: int, length: int) -> RssFrame:
    """Extract an aligned window from a collection of per-link series."""
    links, values = stack_series(series_set)
    return extract_frame_from_matrix(links, values, end_index, length)
