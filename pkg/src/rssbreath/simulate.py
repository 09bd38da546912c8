"""Deterministic synthetic RSS scenario generator with ground truth.

Breathing appears as a slow per-link sinusoid whose amplitude follows the same
ellipse geometry the imaging model uses; motion interference appears as a
random-walk transient that settles into a persistent level shift on a random
subset of links. Everything is a pure function of the scenario config, so a
fixed seed reproduces traces bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import LinkKey, NodeGeometry, RssSeries, enumerate_links
from .errors import ConfigurationError

# Spread of the seeded per-link baseline offsets around the configured level.
BASELINE_SPREAD_DB = 4.0


@dataclass(frozen=True)
class MotionEvent:
    """A movement burst: transient wobble, then a persistent mean shift.

    The affected link fraction is drawn at random per event; during
    ``duration_s`` those links carry a zero-mean random walk whose excursions
    grow toward the step size, and from the end of the transient on they sit
    at the old level plus ``step_db``.
    """

    time_s: float
    link_fraction: float
    step_db: float
    duration_s: float = 0.0

    def __post_init__(self):
        if self.time_s < 0.0:
            raise ConfigurationError("event time cannot be negative")
        if not 0.0 < self.link_fraction <= 1.0:
            raise ConfigurationError("affected link fraction must be in (0, 1]")
        if self.duration_s < 0.0:
            raise ConfigurationError("event duration cannot be negative")


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Full description of a synthetic deployment and what happens in it."""

    nodes: tuple[NodeGeometry, ...]
    n_channels: int
    sample_period_s: float
    duration_s: float
    person_xy: tuple[float, float]
    rate_bpm: float
    amplitude_db: float
    events: tuple[MotionEvent, ...] = ()
    noise_db: float = 0.0
    baseline_db: float = -55.0
    quantize: bool = False
    missing_prob: float = 0.0
    ellipse_lambda_m: float = 1.0
    sensitivity_decay_m: float = 0.5
    sensitive_links: int | None = None
    seed: int = 0

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ConfigurationError("scenario needs at least 2 nodes")
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("node ids must be unique")
        if self.n_channels < 1:
            raise ConfigurationError("scenario needs at least 1 channel")
        if self.sample_period_s <= 0.0:
            raise ConfigurationError("sampling period must be positive")
        if self.duration_s <= 0.0:
            raise ConfigurationError("duration must be positive")
        nyquist_bpm = 30.0 / self.sample_period_s
        if not 0.0 < self.rate_bpm < nyquist_bpm:
            raise ConfigurationError(
                f"breathing rate {self.rate_bpm} bpm outside (0, {nyquist_bpm:.1f}) "
                f"for sampling period {self.sample_period_s} s"
            )
        if self.amplitude_db < 0.0 or self.noise_db < 0.0:
            raise ConfigurationError("amplitudes cannot be negative")
        if not 0.0 <= self.missing_prob < 1.0:
            raise ConfigurationError("missing probability must be in [0, 1)")
        if self.ellipse_lambda_m <= 0.0 or self.sensitivity_decay_m <= 0.0:
            raise ConfigurationError("sensitivity geometry parameters must be positive")
        if self.sensitive_links is not None and self.sensitive_links < 1:
            raise ConfigurationError("sensitive_links cap must be at least 1")
        x, y = self.person_xy
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ConfigurationError("person position must be finite")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s / self.sample_period_s))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """What the scenario actually did: rate, position, and motion times."""

    rate_bpm: float
    person_xy: tuple[float, float]
    event_times_s: tuple[float, ...]


def link_sensitivities(
    nodes,
    links: Sequence[LinkKey],
    person_xy,
    ellipse_lambda: float = 1.0,
    decay_m: float = 0.5,
) -> np.ndarray:
    """Geometric breathing sensitivity in [0, 1] per link.

    A link whose endpoint-distance-sum ellipse contains the person is fully
    sensitive (1.0); outside, sensitivity decays exponentially with the
    distance-sum excess over the ellipse bound. This is a stand-in forward
    model sufficient for end-to-end verification, not a propagation claim.
    """
    pos = {n.node_id: np.asarray(n.position, dtype=np.float64) for n in nodes}
    p = np.asarray(person_xy, dtype=np.float64)
    out = np.empty(len(links))
    cache: dict[tuple[int, int], float] = {}
    for j, lk in enumerate(links):
        key = (lk.tx, lk.rx) if lk.tx < lk.rx else (lk.rx, lk.tx)
        s = cache.get(key)
        if s is None:
            a, b = pos[lk.tx], pos[lk.rx]
            dist_sum = np.linalg.norm(a - p) + np.linalg.norm(b - p)
            excess = max(0.0, dist_sum - np.linalg.norm(a - b) - ellipse_lambda)
            s = float(np.exp(-excess / decay_m))
            cache[key] = s
        out[j] = s
    return out


def generate(config: ScenarioConfig) -> tuple[list[RssSeries], GroundTruth]:
    """Generate per-link RSS series and the matching ground truth.

    Draw order is fixed (phases, baselines, per-event link sets and walks,
    noise, missing mask), so output is fully deterministic given the seed.
    """
    links = enumerate_links(len(config.nodes), config.n_channels)
    n_links, n = len(links), config.n_samples
    if n < 2:
        raise ConfigurationError("duration too short for the sampling period")
    t = config.sample_period_s
    rng = np.random.default_rng(config.seed)

    phases = rng.uniform(0.0, 2.0 * np.pi, n_links)
    baselines = config.baseline_db + rng.uniform(-BASELINE_SPREAD_DB, BASELINE_SPREAD_DB, n_links)

    f_b = config.rate_bpm / 60.0
    sens = link_sensitivities(
        config.nodes, links, config.person_xy, config.ellipse_lambda_m, config.sensitivity_decay_m
    )
    if config.sensitive_links is not None and config.sensitive_links < n_links:
        # Fading stand-in: only the geometrically closest links respond at all.
        order = np.argsort(-sens, kind="stable")
        keep = np.zeros(n_links, dtype=bool)
        keep[order[: config.sensitive_links]] = True
        sens = np.where(keep, sens, 0.0)
    amp = config.amplitude_db * sens
    idx = np.arange(n)
    values = baselines[:, None] + amp[:, None] * np.sin(
        2.0 * np.pi * f_b * t * idx[None, :] + phases[:, None]
    )

    for ev in config.events:
        start = int(round(ev.time_s / t))
        span = int(round(ev.duration_s / t))
        stop = start + span
        m = int(round(ev.link_fraction * n_links))
        chosen = rng.choice(n_links, size=m, replace=False) if m else np.empty(0, dtype=int)
        if span > 0 and m:
            inc = abs(ev.step_db) / (2.0 * np.sqrt(span))
            walk = np.cumsum(rng.normal(0.0, inc, (m, span)), axis=1)
            lo, hi = max(start, 0), min(stop, n)
            if lo < hi:
                values[chosen, lo:hi] += walk[:, lo - start : hi - start]
        if stop < n and m:
            values[chosen, stop:] += ev.step_db

    if config.noise_db > 0.0:
        values += rng.normal(0.0, config.noise_db, (n_links, n))
    if config.quantize:
        values = np.round(values)
    if config.missing_prob > 0.0:
        values[rng.random((n_links, n)) < config.missing_prob] = np.nan

    series = [RssSeries(lk, values[j]) for j, lk in enumerate(links)]
    truth = GroundTruth(
        rate_bpm=config.rate_bpm,
        person_xy=(float(config.person_xy[0]), float(config.person_xy[1])),
        event_times_s=tuple(ev.time_s for ev in config.events),
    )
    return series, truth


def perimeter_layout(
    n_nodes: int, width: float, height: float, margin: float = 0.15
) -> tuple[NodeGeometry, ...]:
    """Evenly spaced nodes clockwise around a room perimeter, starting lower-left."""
    if n_nodes < 2:
        raise ConfigurationError("need at least 2 nodes")
    w, h = width - 2 * margin, height - 2 * margin
    if w <= 0 or h <= 0:
        raise ConfigurationError("margin leaves no perimeter")
    per = 2.0 * (w + h)
    step = per / n_nodes
    nodes = []
    for k in range(n_nodes):
        d = k * step
        if d < h:
            x, y = margin, margin + d
        elif d < h + w:
            x, y = margin + (d - h), margin + h
        elif d < 2 * h + w:
            x, y = margin + w, margin + h - (d - h - w)
        else:
            x, y = margin + w - (d - 2 * h - w), margin
        nodes.append(NodeGeometry(k, (round(x, 3), round(y, 3))))
    return tuple(nodes)


def nap_layout() -> tuple[NodeGeometry, ...]:
    """12-node bedroom layout in a 5.3 x 5.3 m room.

    Even ids 0, 2, 4, 6 ring the bed so their diagonals cross the sleeper's
    chest; odd ids 1, 3, 5, 7 sit along the south wall where their mutual
    links skirt the room; 8..11 fill the east and north walls.
    """
    coords = [
        (0.35, 4.90),  # 0 around the bed
        (0.50, 0.15),  # 1 south wall
        (3.00, 4.90),  # 2 around the bed
        (1.90, 0.15),  # 3 south wall
        (0.35, 2.55),  # 4 around the bed
        (3.30, 0.15),  # 5 south wall
        (3.00, 2.55),  # 6 around the bed
        (4.70, 0.15),  # 7 south wall
        (5.15, 1.20),  # 8 east wall
        (5.15, 2.80),  # 9 east wall
        (5.15, 4.30),  # 10 east wall
        (4.00, 5.15),  # 11 north wall
    ]
    return tuple(NodeGeometry(i, xy) for i, xy in enumerate(coords))

# Chest position used by the nap scenario: middle of the bed area, on the
# even-node diagonals.
NAP_PERSON_XY = (1.675, 3.725)

# Standing position used by the apartment scenarios; tuned so roughly 15
# logical links are strongly breathing-sensitive (see apartment_scenario).
APARTMENT_PERSON_XY = (1.10, 6.80)


def paired_motion_events(
    duration_s: float,
    offsets_s: tuple[float, ...] = (20.0, 37.0),
    link_fraction: float = 0.2,
    step_db: float = 6.0,
    transient_s: float = 2.0,
) -> tuple[MotionEvent, ...]:
    """A movement schedule with one event per minute-offset, alternating sign.

    The default gives two movements per minute; alternating step signs keep
    link baselines from drifting away over long traces.
    """
    events = []
    sign = 1.0
    n_minutes = int(duration_s // 60.0)
    for minute in range(n_minutes):
        for off in offsets_s:
            t0 = minute * 60.0 + off
            if t0 + transient_s >= duration_s:
                continue
            events.append(MotionEvent(t0, link_fraction, sign * step_db, transient_s))
            sign = -sign
    return tuple(events)


def apartment_scenario(motion: bool = False, seed: int = 1) -> ScenarioConfig:
    """33-node, 4-channel scenario in a 7 x 8 m room, 10 bpm metronome breathing.

    The 15 links passing closest to the person carry a 1 dB breathing
    sinusoid; with ``motion`` the trace adds two 6 dB movement events per
    minute, each hitting 20% of the links.
    """
    return ScenarioConfig(
        nodes=perimeter_layout(33, 7.0, 8.0),
        n_channels=4,
        sample_period_s=0.428,
        duration_s=300.0,
        person_xy=APARTMENT_PERSON_XY,
        rate_bpm=10.0,
        amplitude_db=1.0,
        events=paired_motion_events(300.0) if motion else (),
        noise_db=0.3,
        baseline_db=-52.0,
        sensitive_links=15,
        seed=seed,
    )


def nap_scenario(seed: int = 3, duration_s: float = 3900.0) -> ScenarioConfig:
    """12-node, 5-channel bedroom scenario: a 65-minute nap at 13 bpm.

    Includes a handful of mild sleep movements (small steps on a modest link
    fraction), matching a sleeper who shifts position a few times.
    """
    events = []
    sign = 1.0
    for t0 in (480.0, 1260.0, 2040.0, 2820.0, 3540.0):
        if t0 + 6.0 < duration_s:
            events.append(MotionEvent(t0, 0.15, sign * 2.5, 6.0))
            sign = -sign
    return ScenarioConfig(
        nodes=nap_layout(),
        n_channels=5,
        sample_period_s=0.1796,
        duration_s=duration_s,
        person_xy=NAP_PERSON_XY,
        rate_bpm=13.0,
        amplitude_db=0.5,
        events=tuple(events),
        noise_db=0.35,
        baseline_db=-58.0,
        seed=seed,
    )
