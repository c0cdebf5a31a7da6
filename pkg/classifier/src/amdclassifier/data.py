"""Dataset access: fused rasters from the vesselmark output layout.

Fused images live at `<root>/<eye_id>/<vessel>_<family>_f<factor>.png`
(8- or 16-bit grayscale); per-eye class labels come from a two-column CSV
(`eye_id,label`, label 1 = AMD, 0 = normal). Images are resized to the
training resolution with bilinear interpolation.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image


def load_eye_labels(path) -> dict[str, int]:
    """Read `eye_id,label` rows (header optional)."""
    labels: dict[str, int] = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "eye_id":
                continue
            labels[row[0].strip()] = int(row[1])
    if not labels:
        raise ValueError(f"no labels found in {path}")
    bad = {v for v in labels.values() if v not in (0, 1)}
    if bad:
        raise ValueError(f"labels must be 0/1, got {sorted(bad)}")
    return labels


def read_gray_float(path) -> np.ndarray:
    """Single-channel image as float32 in [0, 1]."""
    img = Image.open(path)
    img.load()
    if img.mode == "L":
        return np.asarray(img, dtype=np.float32) / 255.0
    if img.mode in ("I;16", "I"):
        return np.asarray(img, dtype=np.float32) / 65535.0
    return np.asarray(img.convert("L"), dtype=np.float32) / 255.0


def resize_bilinear(image: np.ndarray, size: int) -> torch.Tensor:
    """(H, W) array -> (1, size, size) tensor, bilinear interpolation."""
    t = torch.from_numpy(np.ascontiguousarray(image, dtype=np.float32))
    t = t.unsqueeze(0).unsqueeze(0)
    t = F.interpolate(t, size=(size, size), mode="bilinear", align_corners=False)
    return t.squeeze(0)


def variant_filename(vessel: str, family: str, factor: float) -> str:
    return f"{vessel}_{family}_f{factor:g}.png"


def load_fused_dataset(
    root,
    vessel: str,
    family: str,
    factor: float,
    eye_labels: dict[str, int],
    input_size: int = 224,
) -> tuple[torch.Tensor, torch.Tensor, list[str]]:
    """Stack one attention variant's fused images for every labeled eye.

    Returns (images [N, 1, S, S] in [0, 1], labels [N], eye ids). Eyes listed
    in the label file but missing the variant file raise: silent drops would
    skew the class balance.
    """
    root = Path(root)
    filename = variant_filename(vessel, family, factor)
    images, labels, eyes = [], [], []
    for eye_id in sorted(eye_labels):
        path = root / eye_id / filename
        if not path.is_file():
            raise FileNotFoundError(f"missing fused raster: {path}")
        images.append(resize_bilinear(read_gray_float(path), input_size))
        labels.append(eye_labels[eye_id])
        eyes.append(eye_id)
    return torch.stack(images), torch.tensor(labels, dtype=torch.float32), eyes
