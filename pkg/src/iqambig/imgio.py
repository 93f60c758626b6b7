"""8-bit image containers, PGM/PNG round-trip I/O and synthetic fixtures.

The pipeline is deliberately 8-bit: wider sample types are rejected
instead of being rescaled, because every downstream stage (display
model, distortion bank, metrics) assumes integer codes in 0..255.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from io import BytesIO
from pathlib import Path

import numpy as np
from PIL import Image

FIXTURE_KINDS = ("flat", "gradient", "checkerboard", "natural-proxy")

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_16BIT_PIL_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N"}

# Refuse absurd headers before allocating anything.
_MAX_SAMPLES = 1 << 28

_MIN_FIXTURE_SIDE = 32
_CHECKER_TILE = 8
_CHECKER_DARK = 64
_CHECKER_LIGHT = 192

# BT.709 luma weights for gamma-encoded 8-bit values.
_LUMA_WEIGHTS = (0.2126, 0.7152, 0.0722)


class ImageFormatError(ValueError):
    """Raised for unreadable files or unsupported raster formats."""


@dataclass(frozen=True, eq=False)
class PixelImage:
    """Integer-coded picture: uint8 samples, one or three channels.

    The sample array is copied on construction and marked read-only, so
    instances can be shared freely between pipeline stages.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.dtype != np.uint8:
            raise ValueError(f"samples must be uint8, got {arr.dtype}")
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        else:
            raise ValueError(f"expected (h, w) or (h, w, 3) samples, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must contain at least one pixel")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def channels(self):
        return 1 if self.data.ndim == 2 else 3


@dataclass(frozen=True)
class ContentId:
    """Stable identity of a source image: a name plus a sample digest."""

    name: str
    digest: str


def content_id(name, img):
    """Derive a :class:`ContentId` from the image dimensions and samples."""
    h = hashlib.sha256()
    h.update(f"{img.width}x{img.height}x{img.channels}".encode("ascii"))
    h.update(img.data.tobytes())
    return ContentId(name=name, digest=h.hexdigest())


def _check_sample_budget(width, height, channels):
    if width * height * channels > _MAX_SAMPLES:
        raise ImageFormatError(
            f"dimension overflow: {width}x{height}x{channels} exceeds the sample budget"
        )


def _pgm_token(raw, pos):
    n = len(raw)
    while pos < n:
        c = raw[pos]
        if c == 0x23:  # '#' comment runs to end of line
            while pos < n and raw[pos] not in (0x0A, 0x0D):
                pos += 1
        elif chr(c).isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not chr(raw[pos]).isspace() and raw[pos] != 0x23:
        pos += 1
    if start == pos:
        raise ImageFormatError("unreadable file: truncated PGM header")
    return raw[start:pos], pos


def _parse_pgm(raw):
    fields = []
    pos = 2
    for _ in range(3):
        token, pos = _pgm_token(raw, pos)
        if not token.isdigit():
            raise ImageFormatError(f"unreadable file: bad PGM header field {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError("unreadable file: empty PGM raster")
    if maxval > 255:
        raise ImageFormatError("16-bit inputs are not supported (PGM maxval > 255)")
    if maxval < 1:
        raise ImageFormatError("unreadable file: bad PGM maxval")
    _check_sample_budget(width, height, 1)
    pos += 1  # single whitespace byte separates the header from the raster
    data = raw[pos : pos + width * height]
    if len(data) != width * height:
        raise ImageFormatError("unreadable file: truncated PGM pixel data")
    arr = np.frombuffer(data, dtype=np.uint8).reshape(height, width)
    return PixelImage(arr)


def _parse_png(raw, path):
    try:
        im = Image.open(BytesIO(raw))
        mode, size = im.mode, im.size
    except Exception as exc:
        raise ImageFormatError(f"unreadable file: {path}: {exc}") from exc
    if mode in _16BIT_PIL_MODES:
        raise ImageFormatError(f"16-bit inputs are not supported (PNG mode {mode!r})")
    if mode not in ("L", "RGB"):
        raise ImageFormatError(f"unsupported format: PNG mode {mode!r}")
    _check_sample_budget(size[0], size[1], 1 if mode == "L" else 3)
    try:
        im.load()
    except Exception as exc:
        raise ImageFormatError(f"unreadable file: {path}: {exc}") from exc
    return PixelImage(np.asarray(im, dtype=np.uint8))


def load_image(path):
    """Load a PGM (P5) or PNG file as a :class:`PixelImage`."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"P5":
        return _parse_pgm(raw)
    if raw[:8] == _PNG_MAGIC:
        return _parse_png(raw, path)
    raise ImageFormatError(f"unsupported format: {path}")


def save_image(path, img):
    """Write a :class:`PixelImage` as PGM (grayscale only) or PNG."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        if img.channels != 1:
            raise ValueError("PGM output supports grayscale images only")
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        path.write_bytes(header + img.data.tobytes())
    elif suffix == ".png":
        Image.fromarray(img.data).save(path, format="PNG")
    else:
        raise ValueError(f"unsupported output format: {path}")


def to_grayscale(img):
    """Collapse RGB to single-channel luma (BT.709 weights, rounded).

    Grayscale input is returned unchanged, which makes the operation
    idempotent.
    """
    if img.channels == 1:
        return img
    rgb = img.data.astype(np.float64)
    wr, wg, wb = _LUMA_WEIGHTS
    y = wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2]
    return PixelImage(np.clip(np.rint(y), 0, 255).astype(np.uint8))


# Sparse-support design: isolated features on a flat background keep the
# inter-feature pixels exactly representable in uint8, so mild degradations
# round back to the identical image there instead of dithering the whole
# frame by one code.
_PROXY_DENSITY = 8e-4
_PROXY_PEAK = 6.0
_PROXY_BAND = (1.0 / 32.0, 1.0 / 8.0)


def _natural_proxy(width, height, seed):
    # Sparse signed impulses filtered by a band-limited kernel whose
    # amplitude response is 1/f: the ensemble spectrum then falls off
    # like the spectra of natural scenes while the spatial support
    # stays concentrated around the impulse sites.
    rng = np.random.default_rng(np.random.SeedSequence((seed, width, height)))
    count = max(4, int(round(_PROXY_DENSITY * width * height)))
    sites = rng.choice(width * height, size=count, replace=False)
    signs = rng.choice((-1.0, 1.0), size=count)
    impulses = np.zeros((height, width))
    impulses.ravel()[sites] = signs
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.rfftfreq(width)[None, :]
    f = np.hypot(fy, fx)
    gain = np.zeros_like(f)
    band = (f >= _PROXY_BAND[0]) & (f <= _PROXY_BAND[1])
    gain[band] = 1.0 / f[band]
    field = np.fft.irfft2(np.fft.rfft2(impulses) * gain, s=(height, width))
    peak = np.abs(field).max()
    if peak > 0:
        field *= _PROXY_PEAK / peak
    return np.clip(np.rint(128.0 + field), 0, 255).astype(np.uint8)


def make_fixture(kind, width, height, seed=0):
    """Generate a deterministic synthetic test image.

    Kinds: ``flat`` (mid-gray 128), ``gradient`` (horizontal ramp 0..255),
    ``checkerboard`` (8-pixel tiles alternating 64/192), and
    ``natural-proxy`` (band-limited 1/f noise). The result depends only on
    ``(kind, width, height, seed)``.
    """
    if kind not in FIXTURE_KINDS:
        raise ValueError(f"unknown fixture kind: {kind!r}")
    if width < _MIN_FIXTURE_SIDE or height < _MIN_FIXTURE_SIDE:
        raise ValueError(f"fixture sides must be at least {_MIN_FIXTURE_SIDE}")
    if kind == "flat":
        arr = np.full((height, width), 128, dtype=np.uint8)
    elif kind == "gradient":
        ramp = np.rint(np.arange(width) * 255.0 / (width - 1)).astype(np.uint8)
        arr = np.tile(ramp, (height, 1))
    elif kind == "checkerboard":
        ty = np.arange(height) // _CHECKER_TILE
        tx = np.arange(width) // _CHECKER_TILE
        parity = (ty[:, None] + tx[None, :]) % 2
        arr = np.where(parity == 0, _CHECKER_DARK, _CHECKER_LIGHT).astype(np.uint8)
    else:
        arr = _natural_proxy(width, height, seed)
    return PixelImage(arr)
