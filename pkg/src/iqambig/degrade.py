"""Distortion bank and ladder construction.

Each distortion kind maps an integer severity level (1-based) to a
strictly increasing physical strength:

* ``gaussian-blur``          sigma = blur_sigma_step * level
* ``white-gaussian-noise``   sigma = noise_sigma_step * level (codes)
* ``poisson-noise``          lambda = poisson_lambda0 / level (photons/code)
* ``block-dct-quantization`` table scale = level / dct_table_divisor

A ladder is the ordered sequence of degraded versions of one source
image at levels 1..N. Noise draws are independent between levels; the
random stream for a level is derived from ``(seed, level)``, so any rung
can be rebuilt in isolation.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._filters import gaussian_blur
from .imgio import ContentId, PixelImage, content_id, save_image

DISTORTION_KINDS = (
    "gaussian-blur",
    "white-gaussian-noise",
    "poisson-noise",
    "block-dct-quantization",
)

# Base 8x8 luminance quantization table (quality ~50), scaled by
# level / dct_table_divisor.
_QUANT_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)


def _dct_matrix():
    k = np.arange(8)[:, None]
    n = np.arange(8)[None, :]
    m = np.cos(np.pi * (2 * n + 1) * k / 16.0)
    m[0] *= np.sqrt(1.0 / 8.0)
    m[1:] *= np.sqrt(2.0 / 8.0)
    return m


_DCT = _dct_matrix()


@dataclass(frozen=True)
class DistortionType:
    """A distortion kind plus its level-to-strength schedule constants."""

    kind: str
    blur_sigma_step: float = 0.15
    noise_sigma_step: float = 0.4
    poisson_lambda0: float = 40.0
    dct_table_divisor: float = 10.0

    def __post_init__(self):
        if self.kind not in DISTORTION_KINDS:
            raise ValueError(f"unknown distortion kind: {self.kind!r}")
        for name in ("blur_sigma_step", "noise_sigma_step", "poisson_lambda0", "dct_table_divisor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def strength(self, level):
        """Monotone physical strength of the given severity level."""
        _check_level(level)
        if self.kind == "gaussian-blur":
            return self.blur_sigma_step * level
        if self.kind == "white-gaussian-noise":
            return self.noise_sigma_step * level
        if self.kind == "poisson-noise":
            # Reported as the variance multiplier at unit signal, which
            # grows with level while lambda itself shrinks.
            return level / self.poisson_lambda0
        return level / self.dct_table_divisor


@dataclass(frozen=True)
class DistortionLadder:
    """Versions of one content at strictly increasing distortion levels."""

    content: ContentId
    distortion: DistortionType
    levels: int
    seed: int
    images: tuple


def _check_level(level):
    if not isinstance(level, (int, np.integer)) or isinstance(level, bool) or level < 1:
        raise ValueError(f"level out of range: {level!r}")


def _level_rng(seed, level):
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(level))))


def _quantize_noise(chan, noise):
    return np.clip(np.rint(chan + noise), 0, 255)


def _block_dct_quantize(chan, scale):
    h, w = chan.shape
    hp = (h + 7) // 8 * 8
    wp = (w + 7) // 8 * 8
    padded = np.pad(chan, ((0, hp - h), (0, wp - w)), mode="reflect")
    blocks = padded.reshape(hp // 8, 8, wp // 8, 8).transpose(0, 2, 1, 3)
    # JPEG-style level shift keeps flat mid-gray in the DC bin, where a
    # zero coefficient survives any quantizer scale.
    coef = np.einsum("ij,abjk,lk->abil", _DCT, blocks - 128.0, _DCT)
    q = _QUANT_TABLE * scale
    coef = np.rint(coef / q) * q
    rec = np.einsum("ji,abjk,kl->abil", _DCT, coef, _DCT) + 128.0
    rec = rec.transpose(0, 2, 1, 3).reshape(hp, wp)
    return np.clip(np.rint(rec[:h, :w]), 0, 255)


def _degrade_channel(chan, distortion, level, seed):
    if distortion.kind == "gaussian-blur":
        sigma = distortion.strength(level)
        radius = int(np.ceil(3.0 * sigma))
        if 2 * radius + 1 > min(chan.shape):
            raise ValueError(f"blur kernel larger than image at level {level}")
        return np.clip(np.rint(gaussian_blur(chan, sigma)), 0, 255)
    if distortion.kind == "white-gaussian-noise":
        sigma = distortion.strength(level)
        noise = _level_rng(seed, level).normal(0.0, sigma, size=chan.shape)
        return _quantize_noise(chan, noise)
    if distortion.kind == "poisson-noise":
        lam = distortion.poisson_lambda0 / level
        counts = _level_rng(seed, level).poisson(chan * lam)
        return np.clip(np.rint(counts / lam), 0, 255)
    return _block_dct_quantize(chan, distortion.strength(level))


def degrade_image(src, distortion, level, seed=0):
    """Apply one distortion at the given severity level.

    Dimensions and channel count are preserved; the output is quantized
    back to uint8. Noise kinds draw from a stream derived from
    ``(seed, level)`` only.
    """
    _check_level(level)
    if src.channels == 1:
        out = _degrade_channel(src.data.astype(np.float64), distortion, level, seed)
        return PixelImage(out.astype(np.uint8))
    planes = [
        _degrade_channel(src.data[:, :, c].astype(np.float64), distortion, level, seed + c)
        for c in range(3)
    ]
    return PixelImage(np.stack(planes, axis=2).astype(np.uint8))


def build_ladder(src, distortion, levels, seed=0, content_name=None):
    """Degrade ``src`` at every level 1..levels."""
    if levels < 2:
        raise ValueError("a ladder needs at least two levels")
    cid = content_id(content_name if content_name is not None else "content", src)
    images = tuple(degrade_image(src, distortion, lv, seed) for lv in range(1, levels + 1))
    return DistortionLadder(
        content=cid, distortion=distortion, levels=levels, seed=seed, images=images
    )


def export_ladder(ladder, out_dir, image_format="pgm"):
    """Write ladder rungs as numbered image files; return manifest rows."""
    if image_format not in ("pgm", "png"):
        raise ValueError(f"unsupported ladder image format: {image_format!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for level, img in enumerate(ladder.images, start=1):
        name = f"{ladder.content.name}_{ladder.distortion.kind}_L{level:03d}.{image_format}"
        save_image(out_dir / name, img)
        rows.append(
            {
                "content": ladder.content.name,
                "kind": ladder.distortion.kind,
                "level": level,
                "file": name,
                "seed": ladder.seed,
            }
        )
    return rows


def write_manifest(rows, path):
    """Write ladder manifest rows as CSV with a fixed column order."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["content", "kind", "level", "file", "seed"])
        writer.writeheader()
        writer.writerows(rows)
