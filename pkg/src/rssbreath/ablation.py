"""Node and channel subset sweeps with the stability metric used to rank them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import LinkKey
from .errors import DataError
from .rate import EstimatorConfig, evaluate_rates, sliding_estimates


def filter_links(
    links: Sequence[LinkKey],
    values: np.ndarray,
    nodes: Iterable[int] | None = None,
    channels: Iterable[int] | None = None,
) -> tuple[tuple[LinkKey, ...], np.ndarray]:
    """Keep only links whose endpoints and channel are in the given subsets."""
    node_set = set(nodes) if nodes is not None else None
    chan_set = set(channels) if channels is not None else None
    keep = [
        j
        for j, lk in enumerate(links)
        if (node_set is None or (lk.tx in node_set and lk.rx in node_set))
        and (chan_set is None or lk.channel in chan_set)
    ]
    if not keep:
        raise DataError("subset filter leaves zero links")
    return tuple(links[j] for j in keep), values[keep]


@dataclass(frozen=True)
class SubsetResult:
    """One ablation run: which subset, how many links, how stable the rates."""

    label: str
    n_links: int
    rms_median_bpm: float


def rms_median_for_subset(
    links,
    values,
    sample_period: float,
    config: EstimatorConfig,
    method: str = "breakpoint",
    nodes=None,
    channels=None,
    label: str = "",
) -> SubsetResult:
    sub_links, sub_values = filter_links(links, values, nodes, channels)
    estimates = sliding_estimates(sub_links, sub_values, sample_period, config, method)
    metrics = evaluate_rates(estimates, median_span_s=config.median_span_s)
    return SubsetResult(
        label=label or "all",
        n_links=len(sub_links),
        rms_median_bpm=metrics.rms_median_bpm,
    )


def channel_sweep(
    links,
    values,
    sample_period: float,
    config: EstimatorConfig,
    method: str = "breakpoint",
) -> list[SubsetResult]:
    """Each single channel on its own, then all channels together."""
    all_channels = sorted({lk.channel for lk in links})
    results = [
        rms_median_for_subset(
            links, values, sample_period, config, method,
            channels=[c], label=f"channel {{{c}}}",
        )
        for c in all_channels
    ]
    results.append(
        rms_median_for_subset(
            links, values, sample_period, config, method,
            label=f"all {len(all_channels)} channels",
        )
    )
    return results


def node_subset_report(
    links,
    values,
    sample_period: float,
    config: EstimatorConfig,
    subsets: Sequence[Iterable[int]],
    method: str = "breakpoint",
) -> list[SubsetResult]:
    """Run the estimator on each node subset and report its stability."""
    results = []
    for subset in subsets:
        ids = sorted(subset)
        results.append(
            rms_median_for_subset(
                links, values, sample_period, config, method,
                nodes=ids, label="{" + ",".join(str(i) for i in ids) + "}",
            )
        )
    return results


def format_report(results: Sequence[SubsetResult]) -> str:
    """Aligned text table of subset results."""
    width = max(len(r.label) for r in results)
    lines = [f"{'subset':<{width}}  links  rms_median_bpm"]
    for r in results:
        lines.append(f"{r.label:<{width}}  {r.n_links:>5d}  {r.rms_median_bpm:>14.3f}")
    return "\n".join(lines)
