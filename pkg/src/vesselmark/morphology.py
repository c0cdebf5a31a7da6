"""Binarization, small-component removal, and skeletonization.

Binary masks and skeletons are plain uint8 arrays with values in {0, 1},
shape (height, width). Connectivity is 8-connected throughout: components,
neighbor counts, and the endpoint definition downstream all use the full
3x3 neighborhood.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import ndimage
from skimage.morphology import skeletonize as _skimage_skeletonize

from .raster import DegenerateInputWarning, GrayRaster

# 8-connectivity structuring element for component labeling
_STRUCT8 = np.ones((3, 3), dtype=int)

OTSU_BINS = 256


def as_binary(mask: np.ndarray) -> np.ndarray:
    """Validate and coerce a {0,1}-valued array to uint8."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2D, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    vals = np.unique(arr)
    if not np.all(np.isin(vals, (0, 1))):
        raise ValueError("mask values must be 0 or 1")
    return arr.astype(np.uint8)


def is_binary(data: np.ndarray) -> bool:
    """True when every value of ``data`` is 0 or 1."""
    vals = np.unique(np.asarray(data))
    return bool(np.all(np.isin(vals, (0, 1))))


def otsu_threshold(raster: GrayRaster) -> float:
    """Threshold maximizing between-class variance over a 256-bin histogram.

    Bins cover the raster's declared range ([0, 1] normalized, [0, 2^depth - 1]
    raw); the returned threshold is the upper edge of the last bin assigned to
    the low class, so binarizing with ``value > threshold`` reproduces the
    class split exactly. Ties break toward the lowest threshold.

    A constant raster has zero between-class variance everywhere; by
    convention the constant itself is returned (yielding an empty mask) with
    a DegenerateInputWarning.
    """
    data = raster.data
    if data.size == 0:
        raise ValueError("cannot threshold an empty raster")
    lo, hi = 0.0, 1.0 if raster.normalized else float(raster.max_value)
    dmin, dmax = float(data.min()), float(data.max())
    if dmin == dmax:
        warnings.warn(
            f"constant raster (value {dmin}): Otsu threshold degenerates to the constant",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return dmin

    counts, edges = np.histogram(data, bins=OTSU_BINS, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = counts.sum()

    w0 = np.cumsum(counts).astype(np.float64)
    w1 = total - w0
    mass = np.cumsum(counts * centers)
    mu0 = np.divide(mass, w0, out=np.zeros_like(mass), where=w0 > 0)
    mu1 = np.divide(mass[-1] - mass, w1, out=np.zeros_like(mass), where=w1 > 0)
    # splits k = 0..bins-2: class 0 is bins [0, k], class 1 is bins [k+1, ...]
    between = (w0 * w1 * (mu0 - mu1) ** 2)[:-1]
    best = int(np.argmax(between))
    return float(edges[best + 1])


def binarize(raster: GrayRaster, threshold: float | None = None) -> np.ndarray:
    """Binary mask by ``value > threshold`` (Otsu's threshold when omitted)."""
    if threshold is None:
        threshold = otsu_threshold(raster)
    return (raster.data > threshold).astype(np.uint8)


def remove_small_components(mask: np.ndarray, min_size: int = 5) -> np.ndarray:
    """Zero out 8-connected foreground components with fewer than ``min_size`` pixels.

    Components of exactly ``min_size`` pixels are retained (strict "smaller
    than"). Idempotent.
    """
    mask = as_binary(mask)
    if min_size <= 1:
        return mask.copy()
    labeled, n = ndimage.label(mask, structure=_STRUCT8)
    if n == 0:
        return mask.copy()
    sizes = np.bincount(labeled.ravel())
    keep = sizes >= min_size
    keep[0] = False
    return keep[labeled].astype(np.uint8)


def skeletonize(mask: np.ndarray) -> np.ndarray:
    """Thin a binary mask to a 1-pixel-wide skeleton.

    Uses iterative morphological thinning (two-subiteration scheme); output
    foreground is a subset of the input foreground and the number of
    8-connected components is preserved. Re-skeletonizing a skeleton is the
    identity.
    """
    mask = as_binary(mask)
    return _skimage_skeletonize(mask.astype(bool)).astype(np.uint8)


def count_components(mask: np.ndarray) -> int:
    """Number of 8-connected foreground components."""
    _, n = ndimage.label(as_binary(mask), structure=_STRUCT8)
    return int(n)
