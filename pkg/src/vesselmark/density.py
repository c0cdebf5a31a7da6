"""Local vessel density, sparsity, and low-density (dropout) heatmaps.

Density is the count of vessel pixels within a Euclidean disk around each
pixel. Sparsity inverts the max-normalized density; mask pixels whose
sparsity reaches a threshold seed an impulse map that is smoothed at the
same multi-scale ladder as the tortuosity maps.
"""

from __future__ import annotations

import warnings

import numpy as np

from .morphology import as_binary
from .raster import DegenerateInputWarning, VesselType
from .smoothing import HeatmapFamily, HeatmapSet, multiscale_blur

DEFAULT_DISK_RADIUS = 10
DEFAULT_SPARSITY_THRESHOLD = 0.6


def disk_offsets(radius: int) -> list[tuple[int, int]]:
    """(dx, dy) offsets with Euclidean distance <= radius from the center."""
    if radius < 1:
        raise ValueError(f"disk radius must be >= 1, got {radius}")
    r2 = radius * radius
    return [
        (dx, dy)
        for dy in range(-radius, radius + 1)
        for dx in range(-radius, radius + 1)
        if dx * dx + dy * dy <= r2
    ]


def disk_pixel_count(radius: int) -> int:
    """Pixel count of the discrete radius-r disk."""
    return len(disk_offsets(radius))


def local_density(mask: np.ndarray, radius: int = DEFAULT_DISK_RADIUS) -> np.ndarray:
    """Vessel-pixel count within the radius-r disk at every pixel.

    Computed by exact integer shift-and-add over the disk offsets with
    zero-padded borders, so the result equals per-pixel counting exactly.
    """
    mask = as_binary(mask)
    offsets = disk_offsets(radius)
    h, w = mask.shape
    padded = np.zeros((h + 2 * radius, w + 2 * radius), dtype=np.int64)
    padded[radius : radius + h, radius : radius + w] = mask
    out = np.zeros((h, w), dtype=np.int64)
    for dx, dy in offsets:
        out += padded[radius + dy : radius + dy + h, radius + dx : radius + dx + w]
    return out


def sparsity(density: np.ndarray) -> np.ndarray:
    """S = 1 - D / max(D); all-zero density degenerates to S = 1 everywhere."""
    d = np.asarray(density, dtype=np.float64)
    peak = d.max() if d.size else 0.0
    if peak <= 0:
        warnings.warn(
            "all-zero density field: sparsity saturates at 1",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return np.ones_like(d)
    return 1.0 - d / peak


def sparsity_impulse(
    mask: np.ndarray,
    sparsity_field: np.ndarray,
    threshold: float = DEFAULT_SPARSITY_THRESHOLD,
) -> np.ndarray:
    """Sparsity values at vessel pixels whose sparsity reaches the threshold.

    I(x, y) = S(x, y) where the mask is set and S >= threshold, else 0.
    """
    mask = as_binary(mask)
    s = np.asarray(sparsity_field, dtype=np.float64)
    if mask.shape != s.shape:
        raise ValueError(f"mask {mask.shape} and sparsity {s.shape} dimensions differ")
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"sparsity threshold must be in [0, 1], got {threshold}")
    keep = (mask == 1) & (s >= threshold)
    return np.where(keep, s, 0.0)


def dropout_multiscale(
    impulse: np.ndarray,
    factors,
    vessel_type: VesselType = VesselType.CAPILLARY,
) -> HeatmapSet:
    """Multi-scale Gaussian low-density heatmaps of one impulse map."""
    return multiscale_blur(impulse, factors, vessel_type, HeatmapFamily.DROPOUT)


def normalize_p99(heatmap: np.ndarray) -> tuple[np.ndarray, float]:
    """Divide by the 99th percentile over all pixels and clamp to [0, 1].

    Returns the normalized map and the percentile value used. A zero
    percentile yields an all-zero map with a warning.
    """
    arr = np.asarray(heatmap, dtype=np.float64)
    if arr.size and arr.min() < 0:
        raise ValueError("heatmap must be non-negative")
    p99 = float(np.percentile(arr, 99.0)) if arr.size else 0.0
    if p99 <= 0.0:
        warnings.warn(
            "99th percentile is zero: normalized map is all zero",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return np.zeros_like(arr), p99
    return np.clip(arr / p99, 0.0, 1.0), p99
