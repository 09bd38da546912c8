"""Command-line workflow: simulate, estimate, localize, evaluate.

Exit codes: 0 on success, 1 on usage errors, 2 on data or configuration
errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .ablation import filter_links
from .errors import DataError, RssBreathError
from .io_formats import (
    companion_paths,
    read_locations_csv,
    read_rates_csv,
    read_run_config,
    read_scenario_config,
    read_trace,
    read_truth,
    scenario_override_seed,
    write_image_csv,
    write_locations_csv,
    write_metrics_csv,
    write_rates_csv,
    write_trace_files,
    format_metrics_text,
)
from .rate import evaluate_rate_arrays, median_smooth, sliding_estimates
from .simulate import generate
from .tomography import ImagingModel, PixelGrid

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

log = logging.getLogger("rssbreath")


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _id_list(raw: str) -> list[int]:
    try:
        return [int(p) for p in raw.split(",") if p != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rssbreath", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate a synthetic trace with ground truth")
    p.add_argument("--scenario", required=True, help="scenario config file (key=value)")
    p.add_argument("--out", required=True, help="output trace CSV path")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="sliding-window breathing rate estimation")
    p.add_argument("--trace", required=True, help="trace CSV path")
    p.add_argument("--config", default=None, help="run config file (key=value)")
    p.add_argument("--method", choices=["basic", "breakpoint"], default=None)
    p.add_argument("--nodes", type=_id_list, default=None, help="node id subset, e.g. 0,2,4,6")
    p.add_argument("--channels", type=_id_list, default=None, help="channel subset, e.g. 0,1")
    p.add_argument("--out", required=True, help="output rate CSV path")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("localize", help="per-window breathing image and location")
    p.add_argument("--trace", required=True, help="trace CSV path")
    p.add_argument("--config", default=None, help="run config file (key=value)")
    p.add_argument("--method", choices=["basic", "breakpoint"], default=None)
    p.add_argument("--out", required=True, help="output location CSV path")
    p.add_argument("--images-dir", default=None, help="directory for per-window image CSVs")
    p.add_argument("--no-images", action="store_true", help="skip writing image matrices")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("evaluate", help="metrics from rate/location CSVs and ground truth")
    p.add_argument("--rates", required=True, help="rate CSV from the estimate command")
    p.add_argument("--locations", default=None, help="location CSV from the localize command")
    p.add_argument("--truth", default=None, help="ground-truth file from the simulate command")
    p.add_argument("--median-span", type=float, default=90.0, help="median window, seconds")
    p.add_argument("--out", default=None, help="optional metrics CSV path")
    p.set_defaults(func=cmd_evaluate)
    return parser


def cmd_simulate(args) -> int:
    config = scenario_override_seed(read_scenario_config(args.scenario), args.seed)
    series, truth = generate(config)
    write_trace_files(args.out, series, config.sample_period_s, config.nodes, truth)
    log.info(
        "wrote %s: %d links x %d samples (T=%gs)",
        args.out, len(series), config.n_samples, config.sample_period_s,
    )
    return EXIT_OK


def cmd_estimate(args) -> int:
    run = read_run_config(args.config)
    method = args.method or run.method
    trace = read_trace(args.trace)
    links, values = filter_links(trace.links, trace.values, args.nodes, args.channels)
    estimates = sliding_estimates(
        links, values, trace.sample_period_s, run.estimator, method
    )
    if not estimates:
        raise DataError("no windows could be estimated from this trace")
    times = np.array([e.time_s for e in estimates])
    bpm = np.array([e.bpm for e in estimates])
    median = median_smooth(times, bpm, run.estimator.median_span_s)
    write_rates_csv(args.out, times, bpm, [e.motion_detected for e in estimates], median)
    log.info("wrote %s: %d windows (%s method, %d links)", args.out, len(estimates), method, len(links))
    return EXIT_OK


def cmd_localize(args) -> int:
    run = read_run_config(args.config)
    method = args.method or run.localize_method
    trace = read_trace(args.trace)
    if trace.nodes is None:
        raise DataError(f"localize needs node coordinates ({companion_paths(args.trace)['nodes']})")
    t0 = time.perf_counter()
    grid = PixelGrid.from_nodes(
        trace.nodes, run.tomography.pixel_width_m, run.tomography.grid_pad_m
    )
    model = ImagingModel.build(trace.nodes, trace.links, run.tomography, grid)
    log.info(
        "imaging model built in %.2f s (%d links x %d pixels)",
        time.perf_counter() - t0, len(trace.links), grid.n_pixels,
    )
    estimates = sliding_estimates(
        trace.links, trace.values, trace.sample_period_s, run.estimator, method
    )
    if not estimates:
        raise DataError("no windows could be estimated from this trace")
    row_of = {lk: j for j, lk in enumerate(model.links)}
    times, locations, peaks, degenerate = [], [], [], []
    images = []
    t1 = time.perf_counter()
    for est in estimates:
        if est.links is model.links or est.links == model.links:
            v = est.v
        else:
            v = np.zeros(len(model.links))
            v[[row_of[lk] for lk in est.links]] = est.v
        image = model.estimate_image(v)
        times.append(est.time_s)
        locations.append(image.location)
        peaks.append(image.peak)
        degenerate.append(image.degenerate or est.degenerate)
        images.append(image)
    per_window = (time.perf_counter() - t1) / len(estimates)
    log.info("%d windows imaged, %.1f ms per window", len(estimates), 1e3 * per_window)
    write_locations_csv(args.out, times, locations, peaks, degenerate)
    if not args.no_images:
        img_dir = Path(args.images_dir) if args.images_dir else Path(args.out).with_suffix("").with_name(
            Path(args.out).with_suffix("").name + "_images"
        )
        img_dir.mkdir(parents=True, exist_ok=True)
        for est, image in zip(estimates, images):
            write_image_csv(
                img_dir / f"window_{est.window_end_index:08d}.csv",
                model.grid.image_matrix(image.x),
            )
        log.info("wrote %d image matrices under %s", len(images), img_dir)
    log.info("wrote %s", args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    rates = read_rates_csv(args.rates)
    truth = read_truth(args.truth) if args.truth else None
    metrics: dict = {}
    rate_metrics = evaluate_rate_arrays(
        rates["times"],
        rates["bpm"],
        rates["motion"],
        truth_bpm=truth.rate_bpm if truth else None,
        median_span_s=args.median_span,
        median_bpm=rates["median_bpm"],
    )
    metrics.update(rate_metrics.as_dict())
    if args.locations:
        locations = read_locations_csv(args.locations)
        if locations["times"].shape != rates["times"].shape or not np.allclose(
            locations["times"], rates["times"]
        ):
            raise DataError("rate and location CSVs cover different windows")
        if truth is not None:
            err = np.linalg.norm(locations["xy"] - np.asarray(truth.person_xy), axis=1)
            metrics["mean_location_error_m"] = float(err.mean())
            metrics["rms_location_error_m"] = float(np.sqrt(np.mean(err**2)))
        metrics["degenerate_windows"] = int(locations["degenerate"].sum())
    if args.out:
        write_metrics_csv(args.out, metrics)
    print(format_metrics_text(metrics))
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RssBreathError as exc:
        print(f"rssbreath: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
