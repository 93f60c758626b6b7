"""Ambiguity intervals for objective image-quality metrics.

The package measures how much of a quality metric's score scale is
perceptually meaningless: around every rung of a distortion ladder it
finds the range of scores whose images a human observer could not tell
apart, according to a multiscale visible-difference predictor. Pooled
interval widths and accuracy statistics then allow metrics to be
compared across viewing conditions.
"""

__version__ = "0.1.0"

from .ambiguity import (
    AmbiguityInterval,
    AmbiguitySummary,
    LadderJndOracle,
    ambiguity_intervals,
    canonical_score_range,
    normalize_widths,
    pooled_widths,
    summarize_widths,
)
from .degrade import (
    DISTORTION_KINDS,
    DistortionLadder,
    DistortionType,
    build_ladder,
    degrade_image,
    export_ladder,
)
from .display import (
    DEFAULT_VIEWING,
    LuminanceImage,
    ViewingConditions,
    display_model,
    pixels_per_degree,
)
from .imgio import (
    FIXTURE_KINDS,
    ContentId,
    ImageFormatError,
    PixelImage,
    content_id,
    load_image,
    make_fixture,
    save_image,
    to_grayscale,
)
from .metrics import (
    BUILTIN_METRICS,
    MetricDescriptor,
    ScoreTable,
    gmsd,
    ingest_scores,
    measure_quality,
    ms_ssim,
    psnr,
    ssim,
    uqi,
)
from .stats import (
    BenchmarkReport,
    LogisticFit,
    TestResult,
    benchmark,
    fisher_z_test,
    fit_logistic,
    ingest_subjective,
    mann_whitney,
    plcc,
    rmse,
    srocc,
)
from .vdp import (
    DEFAULT_PARAMETERS,
    PerceivablenessMap,
    VdpParameters,
    calibrate_base_threshold,
    csf_sensitivity,
    distinguishable,
    map_summary,
    vdp,
)

__all__ = [
    "AmbiguityInterval",
    "AmbiguitySummary",
    "BenchmarkReport",
    "BUILTIN_METRICS",
    "ContentId",
    "DEFAULT_PARAMETERS",
    "DEFAULT_VIEWING",
    "DISTORTION_KINDS",
    "DistortionLadder",
    "DistortionType",
    "FIXTURE_KINDS",
    "ImageFormatError",
    "LadderJndOracle",
    "LogisticFit",
    "LuminanceImage",
    "MetricDescriptor",
    "PerceivablenessMap",
    "PixelImage",
    "ScoreTable",
    "TestResult",
    "ViewingConditions",
    "VdpParameters",
    "ambiguity_intervals",
    "benchmark",
    "build_ladder",
    "calibrate_base_threshold",
    "canonical_score_range",
    "content_id",
    "csf_sensitivity",
    "degrade_image",
    "display_model",
    "distinguishable",
    "export_ladder",
    "fisher_z_test",
    "fit_logistic",
    "gmsd",
    "ingest_scores",
    "ingest_subjective",
    "load_image",
    "make_fixture",
    "mann_whitney",
    "map_summary",
    "measure_quality",
    "ms_ssim",
    "normalize_widths",
    "pixels_per_degree",
    "plcc",
    "pooled_widths",
    "psnr",
    "rmse",
    "save_image",
    "srocc",
    "ssim",
    "summarize_widths",
    "to_grayscale",
    "uqi",
    "vdp",
]
