"""Vessel biomarker heatmaps for OCTA projections.

Converts per-vessel-type binary masks into multi-scale tortuosity and
vessel-dropout heatmaps and fuses them with the OCTA raster via bounded
multiplicative attention.
"""

__version__ = "0.1.0"

from .raster import GrayRaster, LabelRaster, VesselType, load_gray, save_gray
from .morphology import otsu_threshold, remove_small_components, skeletonize

__all__ = [
    "GrayRaster",
    "LabelRaster",
    "VesselType",
    "load_gray",
    "save_gray",
    "otsu_threshold",
    "remove_small_components",
    "skeletonize",
    "__version__",
]
