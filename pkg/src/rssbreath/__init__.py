"""Breathing rate estimation and breathing localization from multi-link RSS traces.

The pipeline: a deterministic scenario simulator produces per-link RSS series
with ground truth; sliding-window spectral estimation (with t-test breakpoint
detection for motion robustness) recovers the breathing rate; a regularized
least-squares image inverse locates the breathing person from per-link signal
power. See the CLI in :mod:`rssbreath.cli` for the file-based workflow.
"""

from .breakpoints import (
    BreakpointSet,
    TTestParams,
    detect_breakpoints,
    remove_mean_breakpoint,
    rms_t_score,
    t_score,
)
from .core import (
    LinkKey,
    NodeGeometry,
    RssFrame,
    RssSeries,
    enumerate_links,
    extract_frame,
)
from .errors import (
    ConfigurationError,
    DataError,
    EmptyFrameError,
    RssBreathError,
    SingularModelError,
)
from .rate import (
    EstimatorConfig,
    RateEstimate,
    RateMetrics,
    estimate_rate,
    evaluate_rates,
    median_smooth,
    sliding_estimates,
)
from .simulate import (
    GroundTruth,
    MotionEvent,
    ScenarioConfig,
    generate,
    link_sensitivities,
    nap_layout,
    perimeter_layout,
)
from .spectral import FrequencyGrid, psd_at, remove_mean_basic, sum_psd, window_mean
from .tomography import (
    BreathingImage,
    ImagingModel,
    PixelGrid,
    TomographyParams,
    build_covariance,
    build_projection,
    build_weights,
    estimate_image,
)

__version__ = "0.1.0"

__all__ = [
    "BreakpointSet",
    "BreathingImage",
    "ConfigurationError",
    "DataError",
    "EmptyFrameError",
    "EstimatorConfig",
    "FrequencyGrid",
    "GroundTruth",
    "ImagingModel",
    "LinkKey",
    "MotionEvent",
    "NodeGeometry",
    "PixelGrid",
    "RateEstimate",
    "RateMetrics",
    "RssBreathError",
    "RssFrame",
    "RssSeries",
    "ScenarioConfig",
    "SingularModelError",
    "TTestParams",
    "TomographyParams",
    "build_covariance",
    "build_projection",
    "build_weights",
    "detect_breakpoints",
    "enumerate_links",
    "estimate_image",
    "estimate_rate",
    "evaluate_rates",
    "extract_frame",
    "generate",
    "link_sensitivities",
    "median_smooth",
    "nap_layout",
    "perimeter_layout",
    "psd_at",
    "remove_mean_basic",
    "remove_mean_breakpoint",
    "rms_t_score",
    "sliding_estimates",
    "sum_psd",
    "t_score",
    "window_mean",
    "__version__",
]
