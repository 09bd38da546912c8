"""CSV trace/result formats, flat key=value configs, and atomic file writing.

A trace lives in four sibling files: ``<stem>.csv`` (the samples),
``<stem>.nodes.csv`` (node coordinates), ``<stem>.meta.csv`` (sampling period
and network size), and optionally ``<stem>.truth.csv`` (simulator ground
truth). All outputs are written through a temp-file-and-rename so readers
never observe partial files.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .breakpoints import TTestParams
from .core import LinkKey, NodeGeometry, RssSeries, enumerate_links, stack_series
from .errors import ConfigurationError, DataError
from .rate import EstimatorConfig
from .simulate import GroundTruth, MotionEvent, ScenarioConfig, nap_layout, perimeter_layout
from .tomography import TomographyParams

TRACE_COLUMNS = ["sample_index", "tx", "rx", "channel", "rss_db"]


@contextmanager
def atomic_write(path: Path):
    """Yield a temp path next to ``path``; rename it over on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def companion_paths(trace_path) -> dict[str, Path]:
    base = Path(trace_path).with_suffix("")
    return {
        "nodes": base.with_name(base.name + ".nodes.csv"),
        "meta": base.with_name(base.name + ".meta.csv"),
        "truth": base.with_name(base.name + ".truth.csv"),
    }


@dataclass(frozen=True, eq=False)
class TraceData:
    """A parsed trace: stacked sample matrix plus network metadata."""

    links: tuple[LinkKey, ...]
    values: np.ndarray
    sample_period_s: float
    n_nodes: int
    n_channels: int
    nodes: tuple[NodeGeometry, ...] | None = None


def write_trace_files(
    trace_path,
    series: Sequence[RssSeries],
    sample_period_s: float,
    nodes: Sequence[NodeGeometry],
    truth: GroundTruth | None = None,
) -> None:
    """Write the trace CSV and its nodes/meta (and truth, if given) companions."""
    trace_path = Path(trace_path)
    links, values = stack_series(series)
    n_links, n = values.shape
    frame = pd.DataFrame(
        {
            "sample_index": np.repeat(np.arange(n), n_links),
            "tx": np.tile(np.array([lk.tx for lk in links]), n),
            "rx": np.tile(np.array([lk.rx for lk in links]), n),
            "channel": np.tile(np.array([lk.channel for lk in links]), n),
            "rss_db": values.T.ravel(),
        }
    )
    with atomic_write(trace_path) as tmp:
        frame.to_csv(tmp, index=False, float_format="%.3f", lineterminator="\n")
    paths = companion_paths(trace_path)
    with atomic_write(paths["nodes"]) as tmp:
        lines = ["node_id,x_m,y_m"]
        lines += [f"{nd.node_id},{nd.position[0]:.3f},{nd.position[1]:.3f}" for nd in nodes]
        tmp.write_text("\n".join(lines) + "\n")
    n_channels = max(lk.channel for lk in links) + 1
    with atomic_write(paths["meta"]) as tmp:
        tmp.write_text(
            "key,value\n"
            f"sample_period_s,{sample_period_s!r}\n"
            f"n_nodes,{len(nodes)}\n"
            f"n_channels,{n_channels}\n"
        )
    if truth is not None:
        with atomic_write(paths["truth"]) as tmp:
            lines = ["key,value"]
            lines.append(f"rate_bpm,{truth.rate_bpm!r}")
            lines.append(f"person_x_m,{truth.person_xy[0]!r}")
            lines.append(f"person_y_m,{truth.person_xy[1]!r}")
            lines += [f"event_time_s,{t!r}" for t in truth.event_times_s]
            tmp.write_text("\n".join(lines) + "\n")


def _read_kv_csv(path) -> list[tuple[str, str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing file: {path}")
    rows = []
    lines = path.read_text().splitlines()
    if not lines or lines[0] != "key,value":
        raise DataError(f"{path}: expected a key,value CSV header")
    for line in lines[1:]:
        if not line:
            continue
        key, _, value = line.partition(",")
        rows.append((key, value))
    return rows


def read_nodes(path) -> tuple[NodeGeometry, ...]:
    df = pd.read_csv(path)
    if list(df.columns) != ["node_id", "x_m", "y_m"]:
        raise DataError(f"{path}: expected node_id,x_m,y_m columns")
    return tuple(
        NodeGeometry(int(r.node_id), (float(r.x_m), float(r.y_m))) for r in df.itertuples()
    )


def read_truth(path) -> GroundTruth:
    fields = {}
    events = []
    for key, value in _read_kv_csv(path):
        if key == "event_time_s":
            events.append(float(value))
        else:
            fields[key] = value
    try:
        return GroundTruth(
            rate_bpm=float(fields["rate_bpm"]),
            person_xy=(float(fields["person_x_m"]), float(fields["person_y_m"])),
            event_times_s=tuple(events),
        )
    except KeyError as exc:
        raise DataError(f"{path}: missing ground-truth key {exc}") from exc


def read_trace(trace_path) -> TraceData:
    """Parse a trace CSV with its meta (and nodes, when present) companions."""
    trace_path = Path(trace_path)
    if not trace_path.exists():
        raise DataError(f"missing trace file: {trace_path}")
    paths = companion_paths(trace_path)
    meta = dict(_read_kv_csv(paths["meta"]))
    try:
        period = float(meta["sample_period_s"])
        n_nodes = int(meta["n_nodes"])
        n_channels = int(meta["n_channels"])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{paths['meta']}: bad or missing metadata ({exc})") from exc

    df = pd.read_csv(trace_path)
    if list(df.columns) != TRACE_COLUMNS:
        raise DataError(f"{trace_path}: expected columns {','.join(TRACE_COLUMNS)}")
    if len(df) == 0:
        raise DataError(f"{trace_path}: no samples")
    sidx = df["sample_index"].to_numpy(np.int64)
    tx = df["tx"].to_numpy(np.int64)
    rx = df["rx"].to_numpy(np.int64)
    ch = df["channel"].to_numpy(np.int64)
    rss = df["rss_db"].to_numpy(np.float64)
    if np.any(np.diff(sidx) < 0):
        raise DataError(f"{trace_path}: sample_index must be non-decreasing")
    if sidx[0] < 0:
        raise DataError(f"{trace_path}: negative sample_index")
    if np.any((tx < 0) | (tx >= n_nodes) | (rx < 0) | (rx >= n_nodes) | (tx == rx)):
        raise DataError(f"{trace_path}: tx/rx out of range for {n_nodes} nodes")
    if np.any((ch < 0) | (ch >= n_channels)):
        raise DataError(f"{trace_path}: channel out of range for {n_channels} channels")

    links = enumerate_links(n_nodes, n_channels)
    n_links = len(links)
    pair = tx * (n_nodes - 1) + rx - (rx > tx)
    link_idx = ch * n_nodes * (n_nodes - 1) + pair
    key = sidx * n_links + link_idx
    if np.unique(key).size != key.size:
        raise DataError(f"{trace_path}: duplicate (sample_index, tx, rx, channel) rows")
    n = int(sidx.max()) + 1
    values = np.full((n_links, n), np.nan)
    values[link_idx, sidx] = rss
    nodes = read_nodes(paths["nodes"]) if paths["nodes"].exists() else None
    return TraceData(
        links=tuple(links),
        values=values,
        sample_period_s=period,
        n_nodes=n_nodes,
        n_channels=n_channels,
        nodes=nodes,
    )


# --- flat key=value configuration files ---


def _parse_flat_config(path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"missing config file: {path}")
    out: dict[str, str] = {}
    for ln, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigurationError(f"{path}:{ln}: expected key=value, got {raw!r}")
        out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class RunConfig:
    """Estimator plus imaging settings; defaults reproduce the standard values."""

    estimator: EstimatorConfig = EstimatorConfig()
    tomography: TomographyParams = TomographyParams()
    method: str = "breakpoint"
    localize_method: str = "basic"


_ESTIMATOR_KEYS = {
    "window_samples": int,
    "f_min_hz": float,
    "f_max_hz": float,
    "grid_step_hz": float,
    "hop_s": float,
    "median_span_s": float,
}
_TTEST_KEYS = {"ttest_q": int, "ttest_epsilon": float, "ttest_gamma": float}
_TOMOGRAPHY_KEYS = {
    "pixel_width_m": float,
    "pixel_variance": float,
    "correlation_distance_m": float,
    "ellipse_lambda_m": float,
    "grid_pad_m": float,
}


def read_run_config(path=None) -> RunConfig:
    """Load a run config; with no path, return all defaults."""
    if path is None:
        return RunConfig()
    kv = _parse_flat_config(path)
    est_kwargs, tt_kwargs, tomo_kwargs, other = {}, {}, {}, {}
    for key, raw in kv.items():
        try:
            if key in _ESTIMATOR_KEYS:
                est_kwargs[key] = _ESTIMATOR_KEYS[key](raw)
            elif key in _TTEST_KEYS:
                tt_kwargs[key.removeprefix("ttest_")] = _TTEST_KEYS[key](raw)
            elif key in _TOMOGRAPHY_KEYS:
                tomo_kwargs[key] = _TOMOGRAPHY_KEYS[key](raw)
            elif key in ("method", "localize_method"):
                if raw not in ("basic", "breakpoint"):
                    raise ConfigurationError(f"{path}: {key} must be basic or breakpoint")
                other[key] = raw
            else:
                raise ConfigurationError(f"{path}: unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigurationError(f"{path}: bad value for {key}: {raw!r}") from exc
    if tt_kwargs:
        est_kwargs["ttest"] = TTestParams(**tt_kwargs)
    return RunConfig(
        estimator=EstimatorConfig(**est_kwargs),
        tomography=TomographyParams(**tomo_kwargs),
        **other,
    )


_LAYOUTS = {
    "nap12": nap_layout,
    "apartment33": lambda: perimeter_layout(33, 7.0, 8.0),
}

_SCENARIO_SCALARS = {
    "channels": int,
    "sample_period_s": float,
    "duration_s": float,
    "rate_bpm": float,
    "amplitude_db": float,
    "noise_db": float,
    "baseline_db": float,
    "missing_prob": float,
    "ellipse_lambda_m": float,
    "sensitivity_decay_m": float,
    "seed": int,
}

_SCENARIO_FIELD = {
    "channels": "n_channels",
}


def read_scenario_config(path) -> ScenarioConfig:
    """Parse a scenario file into a ScenarioConfig.

    Nodes come from ``layout = nap12|apartment33`` or explicit ``node_<id> =
    x,y`` entries; motion events from ``event_<k> = time_s,fraction,step_db,
    duration_s``.
    """
    kv = _parse_flat_config(path)
    kwargs: dict = {}
    nodes: dict[int, tuple[float, float]] = {}
    events: dict[int, MotionEvent] = {}
    for key, raw in kv.items():
        try:
            if key == "layout":
                if raw not in _LAYOUTS:
                    raise ConfigurationError(
                        f"{path}: unknown layout {raw!r}, expected one of {sorted(_LAYOUTS)}"
                    )
                kwargs["nodes"] = _LAYOUTS[raw]()
            elif key.startswith("node_"):
                x, y = (float(p) for p in raw.split(","))
                nodes[int(key.removeprefix("node_"))] = (x, y)
            elif key.startswith("event_"):
                t0, frac, step, dur = (float(p) for p in raw.split(","))
                events[int(key.removeprefix("event_"))] = MotionEvent(t0, frac, step, dur)
            elif key == "person":
                x, y = (float(p) for p in raw.split(","))
                kwargs["person_xy"] = (x, y)
            elif key == "quantize":
                kwargs["quantize"] = raw.lower() in ("1", "true", "yes")
            elif key in _SCENARIO_SCALARS:
                kwargs[_SCENARIO_FIELD.get(key, key)] = _SCENARIO_SCALARS[key](raw)
            else:
                raise ConfigurationError(f"{path}: unknown scenario key {key!r}")
        except ValueError as exc:
            raise ConfigurationError(f"{path}: bad value for {key}: {raw!r}") from exc
    if nodes:
        if "nodes" in kwargs:
            raise ConfigurationError(f"{path}: give either layout= or node_<id>= entries, not both")
        kwargs["nodes"] = tuple(
            NodeGeometry(i, nodes[i]) for i in sorted(nodes)
        )
    if "nodes" not in kwargs:
        raise ConfigurationError(f"{path}: no nodes (use layout= or node_<id>=)")
    kwargs["events"] = tuple(events[k] for k in sorted(events))
    required = ("n_channels", "sample_period_s", "duration_s", "person_xy", "rate_bpm", "amplitude_db")
    missing = [k for k in required if k not in kwargs]
    if missing:
        raise ConfigurationError(f"{path}: missing scenario keys: {', '.join(missing)}")
    return ScenarioConfig(**kwargs)


def scenario_override_seed(config: ScenarioConfig, seed: int | None) -> ScenarioConfig:
    return config if seed is None else replace(config, seed=seed)


# --- result CSVs ---


def write_rates_csv(path, times, bpm, motion, median_bpm) -> None:
    lines = ["window_end_time_s,f_hat_bpm,motion_flag,median_bpm"]
    for t, b, m, md in zip(times, bpm, motion, median_bpm):
        lines.append(f"{t:.3f},{b:.2f},{int(m)},{md:.2f}")
    with atomic_write(Path(path)) as tmp:
        tmp.write_text("\n".join(lines) + "\n")


def read_rates_csv(path) -> dict[str, np.ndarray]:
    df = pd.read_csv(path)
    expected = ["window_end_time_s", "f_hat_bpm", "motion_flag", "median_bpm"]
    if list(df.columns) != expected:
        raise DataError(f"{path}: expected columns {','.join(expected)}")
    if len(df) == 0:
        raise DataError(f"{path}: no rate estimates")
    return {
        "times": df["window_end_time_s"].to_numpy(np.float64),
        "bpm": df["f_hat_bpm"].to_numpy(np.float64),
        "motion": df["motion_flag"].to_numpy(bool),
        "median_bpm": df["median_bpm"].to_numpy(np.float64),
    }


def write_locations_csv(path, times, locations, peaks, degenerate) -> None:
    lines = ["window_end_time_s,x_m,y_m,max_pixel_value,degenerate"]
    for t, (x, y), p, d in zip(times, locations, peaks, degenerate):
        lines.append(f"{t:.3f},{x:.3f},{y:.3f},{p:.6e},{int(d)}")
    with atomic_write(Path(path)) as tmp:
        tmp.write_text("\n".join(lines) + "\n")


def read_locations_csv(path) -> dict[str, np.ndarray]:
    df = pd.read_csv(path)
    expected = ["window_end_time_s", "x_m", "y_m", "max_pixel_value", "degenerate"]
    if list(df.columns) != expected:
        raise DataError(f"{path}: expected columns {','.join(expected)}")
    if len(df) == 0:
        raise DataError(f"{path}: no location estimates")
    return {
        "times": df["window_end_time_s"].to_numpy(np.float64),
        "xy": df[["x_m", "y_m"]].to_numpy(np.float64),
        "peak": df["max_pixel_value"].to_numpy(np.float64),
        "degenerate": df["degenerate"].to_numpy(bool),
    }


def write_image_csv(path, image_matrix) -> None:
    """One image as a CSV matrix: rows run along y, columns along x."""
    with atomic_write(Path(path)) as tmp:
        np.savetxt(tmp, np.asarray(image_matrix), fmt="%.6e", delimiter=",")


def _format_metric(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6g}"


def write_metrics_csv(path, metrics: dict) -> None:
    lines = ["metric,value"]
    lines += [f"{k},{_format_metric(v)}" for k, v in metrics.items()]
    with atomic_write(Path(path)) as tmp:
        tmp.write_text("\n".join(lines) + "\n")


def format_metrics_text(metrics: dict) -> str:
    width = max(len(k) for k in metrics) if metrics else 0
    lines = [f"{k:<{width}}  {_format_metric(v) or '-'}" for k, v in metrics.items()]
    return "\n".join(lines)
