"""Multi-scale Gaussian smoothing of impulse maps.

The smoothing scale is tied to image size: sigma_j = f_j * max(H, W) for each
scale factor f_j. Kernels are truncated at 3 sigma and renormalized to unit
sum, so mass is conserved away from borders; borders are zero-padded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .raster import VesselType

DEFAULT_SCALE_FACTORS = (0.02, 0.04, 0.06, 0.08)

MIN_SIGMA = 0.5  # below raster resolution


class HeatmapFamily(enum.Enum):
    TORTUOSITY = "tortuosity"
    DROPOUT = "dropout"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class HeatmapSet:
    """One smoothed map per scale factor, for one vessel type and family."""

    vessel_type: VesselType
    family: HeatmapFamily
    scale_factors: tuple[float, ...]
    sigmas: tuple[float, ...]
    maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not (len(self.maps) == len(self.scale_factors) == len(self.sigmas)):
            raise ValueError("one map and one sigma per scale factor")
        shapes = {m.shape for m in self.maps}
        if len(shapes) > 1:
            raise ValueError(f"maps disagree on dimensions: {shapes}")


def sigma_for_factor(factor: float, shape: tuple[int, int]) -> float:
    """sigma = f * M with M the largest image dimension."""
    if factor <= 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    return factor * max(shape)


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Unit-sum 1D Gaussian kernel truncated at 3 sigma."""
    if sigma < MIN_SIGMA:
        raise ValueError(f"sigma {sigma} below raster resolution ({MIN_SIGMA} px)")
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def _convolve_same(line: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # full convolution cropped back to the signal length: zero-extension
    # semantics that stay correct when the kernel outgrows the signal
    radius = (len(kernel) - 1) // 2
    full = np.convolve(line, kernel, mode="full")
    return full[radius : radius + len(line)]


def gaussian_blur(field: np.ndarray, sigma: float) -> np.ndarray:
    """Separable convolution with a truncated, renormalized Gaussian.

    Zero-padded at the borders: smoothing only moves mass out of the frame,
    never invents it.
    """
    kernel = gaussian_kernel1d(sigma)
    arr = np.asarray(field, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"field must be 2D, got shape {arr.shape}")
    out = np.apply_along_axis(_convolve_same, 1, arr, kernel)
    out = np.apply_along_axis(_convolve_same, 0, out, kernel)
    return out


def multiscale_blur(
    impulse: np.ndarray, factors, vessel_type: VesselType, family: HeatmapFamily
) -> HeatmapSet:
    """Blur one impulse map at every scale factor."""
    factors = tuple(float(f) for f in factors)
    shape = np.asarray(impulse).shape
    sigmas = tuple(sigma_for_factor(f, shape) for f in factors)
    maps = tuple(gaussian_blur(impulse, s) for s in sigmas)
    return HeatmapSet(vessel_type, family, factors, sigmas, maps)
