"""Bounded multiplicative attention fusion with the OCTA projection.

A normalized heatmap is mapped affinely into [atten_min, atten_max] and
multiplied pixel-wise into the projection. Bounds default to [0.5, 1.5]:
low-biomarker regions are suppressed, high-biomarker regions amplified,
without extreme intensity scaling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import VesselType
from .smoothing import HeatmapFamily

DEFAULT_ATTEN_MIN = 0.5
DEFAULT_ATTEN_MAX = 1.5


@dataclass(frozen=True)
class AttentionBounds:
    atten_min: float = DEFAULT_ATTEN_MIN
    atten_max: float = DEFAULT_ATTEN_MAX

    def __post_init__(self):
        if not (0.0 < self.atten_min <= self.atten_max):
            raise ValueError(
                f"need 0 < atten_min <= atten_max, got ({self.atten_min}, {self.atten_max})"
            )


@dataclass(frozen=True)
class FusedRaster:
    """Attention-modulated projection, unclamped (values may exceed 1).

    Saving clamps to [0, 1]; in-memory consumers (the classifier) get the
    unclamped field.
    """

    data: np.ndarray
    eye_id: str
    vessel_type: VesselType
    family: HeatmapFamily
    scale_factor: float


def attention_weights(attention: np.ndarray, bounds: AttentionBounds | None = None) -> np.ndarray:
    """Affine map of a [0, 1] attention map into [atten_min, atten_max]."""
    if bounds is None:
        bounds = AttentionBounds()
    a = np.asarray(attention, dtype=np.float64)
    if a.size and (a.min() < 0.0 or a.max() > 1.0):
        raise ValueError("attention map must be normalized to [0, 1] first")
    return bounds.atten_min + a * (bounds.atten_max - bounds.atten_min)


def fuse(
    projection: np.ndarray,
    weights: np.ndarray,
    eye_id: str = "",
    vessel_type: VesselType = VesselType.CAPILLARY,
    family: HeatmapFamily = HeatmapFamily.TORTUOSITY,
    scale_factor: float = 0.0,
) -> FusedRaster:
    """Pointwise product of a normalized projection with attention weights."""
    r = np.asarray(projection, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if r.shape != w.shape:
        raise ValueError(f"projection {r.shape} and weights {w.shape} dimensions differ")
    if r.size and (r.min() < 0.0 or r.max() > 1.0):
        raise ValueError("projection must be normalized to [0, 1]")
    return FusedRaster(r * w, eye_id, vessel_type, family, scale_factor)


def align_weights(weights: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Bilinearly resample a weight map onto the projection grid if needed.

    Heatmaps normally share the projection resolution; a mismatch is
    tolerated with a warning for robustness to other datasets.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape == tuple(shape):
        return w
    warnings.warn(
        f"resampling attention weights {w.shape} -> {tuple(shape)}",
        UserWarning,
        stacklevel=2,
    )
    zoom = (shape[0] / w.shape[0], shape[1] / w.shape[1])
    return ndimage.zoom(w, zoom, order=1, mode="nearest", grid_mode=True)
