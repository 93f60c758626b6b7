"""Run configuration: INI parsing, validation and canonical digests.

A run is one experiment: a content set, a distortion bank, a metric
list, display conditions, predictor constants, and scan settings. The
digest of a configuration is embedded in output sidecars so results can
be traced back to the exact settings that produced them.
"""

import configparser
import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path

from .degrade import DISTORTION_KINDS, DistortionType
from .display import ViewingConditions
from .imgio import FIXTURE_KINDS
from .metrics import BUILTIN_METRICS
from .vdp import VdpParameters


class ValidationError(ValueError):
    """Raised when a configuration or command line fails validation."""


@dataclass(frozen=True)
class FixtureSpec:
    kind: str
    width: int
    height: int
    seed: int = 0

    @property
    def name(self):
        return f"{self.kind}-{self.width}x{self.height}-s{self.seed}"


_DEFAULT_FIXTURES = (
    FixtureSpec("natural-proxy", 256, 256, 1),
    FixtureSpec("natural-proxy", 256, 256, 2),
    FixtureSpec("natural-proxy", 256, 256, 3),
)

_DEFAULT_KINDS = ("white-gaussian-noise", "block-dct-quantization", "gaussian-blur")


@dataclass(frozen=True)
class RunConfig:
    fixtures: tuple = _DEFAULT_FIXTURES
    images: tuple = ()
    distortions: tuple = tuple(DistortionType(kind) for kind in _DEFAULT_KINDS)
    levels: int = 50
    seed: int = 7
    metrics: tuple = ("psnr", "ssim")
    score_files: tuple = ()
    display: ViewingConditions = field(default_factory=ViewingConditions)
    distance_multiples: tuple = (2.0, 4.0, 6.0)
    vdp: VdpParameters = field(default_factory=VdpParameters)
    k: float = 0.01
    normalization: str = "run"  # "run" or "ladder"
    output: str = "out"
    jobs: int = 1


def default_config():
    return RunConfig()


_SECTION_KEYS = {
    "run": {"levels", "seed", "k", "normalization", "distances", "jobs", "output"},
    "contents": {"fixtures", "images"},
    "distortions": {
        "kinds",
        "blur_sigma_step",
        "noise_sigma_step",
        "poisson_lambda0",
        "dct_table_divisor",
    },
    "metrics": {"names", "score_files"},
    "display": {
        "display_height",
        "vertical_resolution",
        "peak_luminance",
        "black_level",
        "gamma",
        "distance_multiple",
    },
    "vdp": {
        "pyramid_levels",
        "masking_knee",
        "masking_exponent",
        "psychometric_slope",
        "base_threshold",
        "csf_constants",
    },
}


def _split_list(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def _parse_fixture(text):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValidationError(f"bad fixture spec {text!r}, expected kind:WxH[:seed]")
    kind = parts[0]
    if kind not in FIXTURE_KINDS:
        raise ValidationError(f"unknown fixture kind {kind!r}")
    dims = parts[1].lower().split("x")
    try:
        width, height = int(dims[0]), int(dims[1])
        seed = int(parts[2]) if len(parts) == 3 else 0
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"bad fixture spec {text!r}: {exc}") from exc
    return FixtureSpec(kind, width, height, seed)


def _get_typed(section, key, cast, errors):
    raw = section.get(key)
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError:
        errors.append(f"[{section.name}] {key}: cannot parse {raw!r}")
        return None


def parse_config(path):
    """Read an INI run configuration; unknown sections or keys fail loud."""
    parser = configparser.ConfigParser(interpolation=None)
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    try:
        parser.read_string(path.read_text(), source=str(path))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ValidationError(f"cannot parse config {path}: {exc}") from exc

    errors = []
    for name in parser.sections():
        if name not in _SECTION_KEYS:
            errors.append(f"unknown config section [{name}]")
            continue
        for key in parser[name]:
            if key not in _SECTION_KEYS[name]:
                errors.append(f"unknown key {key!r} in section [{name}]")
    if errors:
        raise ValidationError("; ".join(errors))

    cfg = default_config()
    updates = {}

    if parser.has_section("run"):
        run = parser["run"]
        for key, cast in (("levels", int), ("seed", int), ("jobs", int), ("k", float)):
            value = _get_typed(run, key, cast, errors)
            if value is not None:
                updates[key] = value
        if "normalization" in run:
            updates["normalization"] = run["normalization"].strip()
        if "output" in run:
            updates["output"] = run["output"].strip()
        if "distances" in run:
            try:
                updates["distance_multiples"] = tuple(float(d) for d in _split_list(run["distances"]))
            except ValueError:
                errors.append(f"[run] distances: cannot parse {run['distances']!r}")

    if parser.has_section("contents"):
        contents = parser["contents"]
        if "fixtures" in contents:
            specs = []
            for item in _split_list(contents["fixtures"]):
                try:
                    specs.append(_parse_fixture(item))
                except ValidationError as exc:
                    errors.append(str(exc))
            updates["fixtures"] = tuple(specs)
        if "images" in contents:
            updates["images"] = tuple(_split_list(contents["images"]))

    if parser.has_section("distortions"):
        dist = parser["distortions"]
        constants = {}
        for key in ("blur_sigma_step", "noise_sigma_step", "poisson_lambda0", "dct_table_divisor"):
            value = _get_typed(dist, key, float, errors)
            if value is not None:
                constants[key] = value
        kinds = _split_list(dist["kinds"]) if "kinds" in dist else _DEFAULT_KINDS
        types = []
        for kind in kinds:
            try:
                types.append(DistortionType(kind, **constants))
            except ValueError as exc:
                errors.append(str(exc))
        updates["distortions"] = tuple(types)

    if parser.has_section("metrics"):
        metrics = parser["metrics"]
        if "names" in metrics:
            updates["metrics"] = tuple(_split_list(metrics["names"]))
        if "score_files" in metrics:
            updates["score_files"] = tuple(_split_list(metrics["score_files"]))

    if parser.has_section("display"):
        disp = parser["display"]
        fields = {}
        for key, cast in (
            ("display_height", float),
            ("vertical_resolution", int),
            ("peak_luminance", float),
            ("black_level", float),
            ("gamma", float),
            ("distance_multiple", float),
        ):
            value = _get_typed(disp, key, cast, errors)
            if value is not None:
                fields[key] = value
        if not errors:
            try:
                updates["display"] = replace(cfg.display, **fields)
            except ValueError as exc:
                errors.append(f"[display] {exc}")

    if parser.has_section("vdp"):
        vdp_sec = parser["vdp"]
        fields = {}
        for key, cast in (
            ("pyramid_levels", int),
            ("masking_knee", float),
            ("masking_exponent", float),
            ("psychometric_slope", float),
            ("base_threshold", float),
        ):
            value = _get_typed(vdp_sec, key, cast, errors)
            if value is not None:
                fields[key] = value
        if "csf_constants" in vdp_sec:
            try:
                fields["csf_constants"] = tuple(float(c) for c in _split_list(vdp_sec["csf_constants"]))
            except ValueError:
                errors.append(f"[vdp] csf_constants: cannot parse {vdp_sec['csf_constants']!r}")
        if not errors:
            try:
                updates["vdp"] = replace(cfg.vdp, **fields)
            except ValueError as exc:
                errors.append(f"[vdp] {exc}")

    if errors:
        raise ValidationError("; ".join(errors))
    cfg = replace(cfg, **updates)
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    """Check cross-field invariants; collect every problem before raising."""
    errors = []
    if not cfg.fixtures and not cfg.images:
        errors.append("no contents configured (need fixtures or images)")
    for spec in cfg.fixtures:
        if spec.width < 32 or spec.height < 32:
            errors.append(f"fixture {spec.name}: sides must be at least 32")
    for image in cfg.images:
        if not Path(image).is_file():
            errors.append(f"content image not found: {image}")
    if not cfg.distortions:
        errors.append("no distortions configured")
    if cfg.levels < 2:
        errors.append("levels must be at least 2")
    if not cfg.metrics:
        errors.append("no metrics configured")
    for metric in cfg.metrics:
        if metric not in BUILTIN_METRICS and not cfg.score_files:
            errors.append(f"metric {metric!r} is not built in and no score files are configured")
    for score_file in cfg.score_files:
        if not Path(score_file).is_file():
            errors.append(f"score file not found: {score_file}")
    if not cfg.distance_multiples:
        errors.append("no distance multiples configured")
    elif any(d <= 0 for d in cfg.distance_multiples):
        errors.append("distance multiples must be positive")
    if not 0.0 <= cfg.k <= 1.0:
        errors.append("k must lie in [0, 1]")
    if cfg.normalization not in ("run", "ladder"):
        errors.append(f"normalization must be 'run' or 'ladder', got {cfg.normalization!r}")
    if cfg.jobs < 1:
        errors.append("jobs must be at least 1")
    if errors:
        raise ValidationError("; ".join(errors))
    return cfg


def config_digest(cfg):
    """Stable hex digest of every semantic field of the configuration.

    Output location and parallelism do not change results, so they are
    excluded from the digest.
    """
    semantic = replace(cfg, output="", jobs=1)
    return hashlib.sha256(repr(semantic).encode("utf-8")).hexdigest()
