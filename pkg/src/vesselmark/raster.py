"""Grayscale raster I/O and label-to-mask splitting.

Rasters are loaded from 8- or 16-bit single-channel PNG or binary PGM (P5)
files, kept raw until explicitly normalized, and saved back losslessly.
Multilabel segmentation rasters are split into per-vessel-type binary masks
through an explicit, validated label-value mapping.
"""

from __future__ import annotations

import enum
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError


class DegenerateInputWarning(UserWarning):
    """Raised as a warning when an operation hits a defined degenerate case."""


class VesselType(enum.Enum):
    ARTERY = "artery"
    VEIN = "vein"
    CAPILLARY = "capillary"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class GrayRaster:
    """2D scalar field with an explicit bit depth.

    ``data`` is row-major, shape (height, width). Raw rasters carry integer
    intensities with ``bit_depth`` 8 or 16; normalized rasters carry floats in
    [0, 1] and ``bit_depth`` records the depth they were normalized from.
    """

    data: np.ndarray
    bit_depth: int = 8
    normalized: bool = field(default=False)

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != 2:
            raise ValueError(f"raster data must be 2D, got shape {d.shape}")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"unsupported bit depth {self.bit_depth}")
        if self.normalized:
            d = np.ascontiguousarray(d, dtype=np.float64)
            if d.size and (d.min() < 0.0 or d.max() > 1.0):
                raise ValueError("normalized raster has values outside [0, 1]")
        else:
            dtype = np.uint8 if self.bit_depth == 8 else np.uint16
            d = np.ascontiguousarray(d, dtype=dtype)
        object.__setattr__(self, "data", d)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def max_value(self) -> int:
        """Maximum representable intensity for the declared bit depth."""
        return (1 << self.bit_depth) - 1


@dataclass(frozen=True)
class LabelRaster:
    """Row-major integer label image (multilabel segmentation carrier)."""

    data: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(np.asarray(self.data), dtype=np.int64)
        if d.ndim != 2:
            raise ValueError(f"label data must be 2D, got shape {d.shape}")
        if d.size and d.min() < 0:
            raise ValueError("label values must be non-negative")
        object.__setattr__(self, "data", d)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class LabelMapping:
    """Label value sets per vessel type, plus values to drop (e.g. FAZ).

    The three vessel sets must be pairwise disjoint; ``ignored`` values are
    accepted in label rasters but routed to no vessel type.
    """

    artery: frozenset[int]
    vein: frozenset[int]
    capillary: frozenset[int]
    ignored: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "artery", frozenset(self.artery))
        object.__setattr__(self, "vein", frozenset(self.vein))
        object.__setattr__(self, "capillary", frozenset(self.capillary))
        object.__setattr__(self, "ignored", frozenset(self.ignored))
        sets = [self.artery, self.vein, self.capillary, self.ignored]
        names = ["artery", "vein", "capillary", "ignored"]
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                overlap = sets[i] & sets[j]
                if overlap:
                    raise ValueError(
                        f"label sets for {names[i]} and {names[j]} overlap: {sorted(overlap)}"
                    )

    def for_type(self, vtype: VesselType) -> frozenset[int]:
        return {
            VesselType.ARTERY: self.artery,
            VesselType.VEIN: self.vein,
            VesselType.CAPILLARY: self.capillary,
        }[vtype]

    @property
    def known_values(self) -> frozenset[int]:
        return self.artery | self.vein | self.capillary | self.ignored | {0}


_PGM_HEADER = re.compile(rb"^P5\s+(\d+)\s+(\d+)\s+(\d+)\s")


def _load_pgm(path: Path) -> GrayRaster:
    raw = path.read_bytes()
    m = _PGM_HEADER.match(raw)
    if m is None:
        raise ValueError(f"unsupported container: {path} is not a binary P5 PGM")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval == 255:
        dtype, depth = np.dtype(np.uint8), 8
    elif maxval == 65535:
        dtype, depth = np.dtype(">u2"), 16
    else:
        raise ValueError(f"unsupported container: PGM maxval {maxval} (need 255 or 65535)")
    payload = raw[m.end():]
    expected = width * height * dtype.itemsize
    if len(payload) != expected:
        raise ValueError(f"unsupported container: PGM payload is {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return GrayRaster(data=data.astype(np.uint16 if depth == 16 else np.uint8), bit_depth=depth)


def _save_pgm(raster: GrayRaster, path: Path) -> None:
    header = f"P5\n{raster.width} {raster.height}\n{raster.max_value}\n".encode("ascii")
    if raster.bit_depth == 16:
        payload = raster.data.astype(">u2").tobytes()
    else:
        payload = raster.data.astype(np.uint8).tobytes()
    path.write_bytes(header + payload)


def _load_png(path: Path, channel: int | None) -> GrayRaster:
    try:
        img = Image.open(path)
        img.load()
    except UnidentifiedImageError as exc:
        raise ValueError(f"unsupported container: {path}") from exc
    if img.mode in ("L", "P") and img.mode == "P":
        img = img.convert("L")
    if img.mode == "L":
        return GrayRaster(np.asarray(img, dtype=np.uint8), bit_depth=8)
    if img.mode in ("I;16", "I"):
        arr = np.asarray(img).astype(np.int64)
        if arr.size and (arr.min() < 0 or arr.max() > 65535):
            raise ValueError(f"unsupported container: {path} exceeds 16-bit range")
        return GrayRaster(arr.astype(np.uint16), bit_depth=16)
    if img.mode in ("RGB", "RGBA", "LA"):
        if channel is None:
            raise ValueError(
                f"multi-channel input {path} (mode {img.mode}); configure a channel to select"
            )
        arr = np.asarray(img)
        if channel >= arr.shape[2]:
            raise ValueError(f"channel {channel} out of range for mode {img.mode}")
        return GrayRaster(arr[:, :, channel].astype(np.uint8), bit_depth=8)
    raise ValueError(f"unsupported container: {path} has mode {img.mode}")


def load_gray(path, channel: int | None = None) -> GrayRaster:
    """Load an 8- or 16-bit single-channel PNG or binary-P5 PGM file.

    Intensities are returned raw, with the container's bit depth declared;
    no normalization is applied. Multi-channel images are rejected unless
    ``channel`` selects the plane to keep.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such raster file: {path}")
    if path.stat().st_size == 0:
        raise ValueError(f"unsupported container: {path} is empty")
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return _load_pgm(path)
    if suffix == ".png":
        return _load_png(path, channel)
    raise ValueError(f"unsupported container: {path} (expected .png or .pgm)")


def save_gray(raster: GrayRaster, path) -> None:
    """Save a raw raster losslessly to PNG or binary-P5 PGM.

    Normalized rasters must be converted back to integer intensities first
    (see pipeline save paths); this writer refuses them to avoid silent
    quantization choices.
    """
    path = Path(path)
    if raster.normalized:
        raise ValueError("save_gray expects a raw raster; quantize normalized data explicitly")
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        _save_pgm(raster, path)
    elif suffix == ".png":
        Image.fromarray(raster.data).save(path)
    else:
        raise ValueError(f"unsupported container: {path} (expected .png or .pgm)")


def load_labels(path) -> LabelRaster:
    """Load a multilabel segmentation raster (single-channel integer image)."""
    return LabelRaster(load_gray(path).data)


def split_labels(
    labels: LabelRaster,
    mapping: LabelMapping,
    strict: bool = True,
) -> dict[VesselType, np.ndarray]:
    """Split a label raster into per-vessel-type binary masks.

    A pixel of the output mask for a vessel type is 1 iff its label value is
    in that type's set. Label values absent from the mapping (and not 0 or
    ignored) raise when ``strict``, else warn and are dropped.
    """
    present = np.unique(labels.data)
    unknown = sorted(set(int(v) for v in present) - set(mapping.known_values))
    if unknown:
        msg = f"label values {unknown} present in raster but absent from mapping"
        if strict:
            raise ValueError(msg)
        warnings.warn(msg, UserWarning, stacklevel=2)
    masks: dict[VesselType, np.ndarray] = {}
    for vtype in VesselType:
        values = mapping.for_type(vtype)
        mask = np.isin(labels.data, list(values)).astype(np.uint8)
        masks[vtype] = mask
    return masks


def normalize(raster: GrayRaster) -> GrayRaster:
    """Scale raw intensities by the declared bit-depth maximum into [0, 1].

    Already-normalized rasters pass through unchanged (idempotent).
    """
    if raster.data.size == 0:
        raise ValueError("cannot normalize an empty raster")
    if raster.normalized:
        return raster
    data = raster.data.astype(np.float64) / float(raster.max_value)
    return GrayRaster(data, bit_depth=raster.bit_depth, normalized=True)


def quantize(data: np.ndarray, bit_depth: int = 16, clamp: bool = True) -> GrayRaster:
    """Map float values in [0, 1] to raw intensities at the given depth.

    Values outside [0, 1] are clamped when ``clamp`` (file formats cannot
    carry them), else rejected.
    """
    arr = np.asarray(data, dtype=np.float64)
    if clamp:
        arr = np.clip(arr, 0.0, 1.0)
    elif arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("values outside [0, 1] and clamping disabled")
    maxv = (1 << bit_depth) - 1
    ints = np.rint(arr * maxv)
    return GrayRaster(ints, bit_depth=bit_depth)
