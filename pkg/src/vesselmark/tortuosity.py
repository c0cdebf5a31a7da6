"""High-tortuosity segment selection and tortuosity heatmaps.

Segments whose excess tortuosity sits strictly above a percentile of the
per-mask distribution are weighted by length and curvature magnitude, their
weight spread uniformly over their pixels into an impulse map, and the map
smoothed at multiple Gaussian scales.
"""

from __future__ import annotations

import warnings
from typing import Sequence

import numpy as np

from .graph import SegmentStats, VesselEdge
from .raster import DegenerateInputWarning, VesselType
from .smoothing import HeatmapFamily, HeatmapSet, multiscale_blur

DEFAULT_PERCENTILE = 85.0
DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 1.0
DEFAULT_MIN_EDGE_PIXELS = 3


def eligible_indices(
    stats: Sequence[SegmentStats], min_pixels: int = DEFAULT_MIN_EDGE_PIXELS
) -> list[int]:
    """Indices of edges that enter the tortuosity distribution.

    Degenerate edges (zero chord) are excluded outright; chains shorter than
    ``min_pixels`` are recorded but kept out of the percentile statistics
    (2-pixel chains always have T = 1 and would dilute the distribution).
    """
    return [
        i
        for i, s in enumerate(stats)
        if not s.degenerate and s.pixel_count >= min_pixels
    ]


def select_high_tortuosity(
    stats: Sequence[SegmentStats], percentile: float = DEFAULT_PERCENTILE
) -> list[int]:
    """Indices of segments with excess tortuosity strictly above the percentile.

    The percentile is computed over the excess-tortuosity values of ``stats``
    by linear interpolation on the sorted values. An empty input yields an
    empty selection with a warning (the downstream heatmap is then zero).
    """
    if not (0.0 <= percentile <= 100.0):
        raise ValueError(f"percentile must be in [0, 100], got {percentile}")
    values = np.asarray([s.excess_tortuosity for s in stats], dtype=np.float64)
    if values.size == 0:
        warnings.warn(
            "empty tortuosity distribution: nothing to select",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return []
    if np.isnan(values).any():
        raise ValueError("degenerate segments must be excluded before selection")
    cutoff = np.percentile(values, percentile)
    return [i for i, v in enumerate(values) if v > cutoff]


def segment_weight(
    pixel_count: int,
    excess: float,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
) -> float:
    """Segment weight N^alpha * excess^beta.

    Zero excess with positive beta gives weight 0 (the segment contributes
    nothing); 0^0 follows the usual convention of 1.
    """
    if pixel_count < 1:
        raise ValueError("pixel count must be >= 1")
    if excess < 0:
        raise ValueError("excess tortuosity must be >= 0")
    return float(pixel_count) ** alpha * float(excess) ** beta


def build_impulse_map(
    edges: Sequence[VesselEdge],
    weights: Sequence[float],
    shape: tuple[int, int],
) -> np.ndarray:
    """Distribute each segment's weight uniformly across its pixels.

    Every pixel of segment i receives w_i / n_i; pixels shared by two
    selected segments (node-adjacent) accumulate additively, so the map total
    is the sum of all weights.
    """
    if len(edges) != len(weights):
        raise ValueError("edges/weights length mismatch")
    h, w = shape
    out = np.zeros((h, w), dtype=np.float64)
    for edge, weight in zip(edges, weights):
        share = weight / edge.pixel_count
        for x, y in edge.pixels:
            if not (0 <= x < w and 0 <= y < h):
                raise ValueError(f"segment pixel ({x}, {y}) outside {w}x{h} raster")
            out[y, x] += share
    return out


def gaussian_multiscale(
    impulse: np.ndarray,
    factors,
    vessel_type: VesselType = VesselType.CAPILLARY,
) -> HeatmapSet:
    """Multi-scale Gaussian tortuosity heatmaps of one impulse map."""
    return multiscale_blur(impulse, factors, vessel_type, HeatmapFamily.TORTUOSITY)


def normalize_attention(heatmap: np.ndarray) -> np.ndarray:
    """Min-max scale the nonzero support to [0, 1]; zero pixels stay zero.

    A constant nonzero map maps its support to 1.0 (min = max convention);
    an all-zero map is returned unchanged with a warning, which downstream
    degenerates fusion to uniform 0.5 weighting.
    """
    arr = np.asarray(heatmap, dtype=np.float64)
    nz = arr != 0
    if not nz.any():
        warnings.warn(
            "all-zero heatmap: attention normalization is the identity",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return arr.copy()
    lo = arr[nz].min()
    hi = arr[nz].max()
    out = np.zeros_like(arr)
    if hi == lo:
        out[nz] = 1.0
    else:
        out[nz] = (arr[nz] - lo) / (hi - lo)
    return out
