"""Display model: integer codes to absolute luminance, and angular geometry.

Viewing distance is expressed as a multiple of the display height. At
distance d*H a display of R vertical pixels subtends R/(d_degrees)
pixels per degree; the small-angle approximation used here keeps that
mapping linear in the distance multiple.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ViewingConditions:
    """Physical setup a picture is judged under.

    ``display_height`` is in meters, luminances in cd/m^2, and
    ``distance_multiple`` is the viewing distance divided by the display
    height.
    """

    display_height: float = 0.3
    vertical_resolution: int = 1080
    peak_luminance: float = 100.0
    black_level: float = 0.5
    gamma: float = 2.2
    distance_multiple: float = 4.0

    def __post_init__(self):
        if self.display_height <= 0:
            raise ValueError("display_height must be positive")
        if self.vertical_resolution < 1:
            raise ValueError("vertical_resolution must be at least 1")
        if not 0 <= self.black_level < self.peak_luminance:
            raise ValueError("need 0 <= black_level < peak_luminance")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.distance_multiple <= 0:
            raise ValueError("distance_multiple must be positive")


DEFAULT_VIEWING = ViewingConditions()


@dataclass(frozen=True, eq=False)
class LuminanceImage:
    """Absolute luminance samples (cd/m^2), float64."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected (h, w) luminance samples, got shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[0]


def pixels_per_degree(vc):
    """Angular sampling rate of the display for the given conditions.

    One degree of visual angle at distance d*H covers (pi/180)*d*H
    meters, i.e. (pi/180)*d*R pixels for R vertical pixels of height H.
    """
    return math.pi / 180.0 * vc.distance_multiple * vc.vertical_resolution


def display_model(img, vc=DEFAULT_VIEWING):
    """Map 8-bit grayscale codes to absolute luminance.

    L(v) = black + (peak - black) * (v / 255) ** gamma. The output range
    is exactly [black_level, peak_luminance].
    """
    if img.channels != 1:
        raise ValueError("display model expects a grayscale image")
    v = img.data.astype(np.float64) / 255.0
    lum = vc.black_level + (vc.peak_luminance - vc.black_level) * v**vc.gamma
    return LuminanceImage(lum)
