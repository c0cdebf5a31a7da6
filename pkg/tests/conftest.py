import math

import numpy as np
import pytest

from vesselmark.graph import extract_graph
from vesselmark.morphology import skeletonize


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def mask_to_graph(mask):
    """Mask -> thinned skeleton -> graph, as the pipeline runs it."""
    return extract_graph(skeletonize(mask))


def random_blob_mask(rng, shape=(48, 48), density=0.35, dilations=1):
    from scipy import ndimage

    m = rng.random(shape) < density
    if dilations:
        m = ndimage.binary_dilation(m, iterations=dilations)
    return m.astype(np.uint8)


def make_eye(root, eye_id, seed, shape=(100, 120)):
    """Synthetic eye: projection + multilabel raster (1=artery, 2=vein, 3=capillary)."""
    from PIL import Image

    from vesselmark.phantoms import CircularArc, Grid, RandomWalkVessel, rasterize

    h, w = shape
    rng = np.random.default_rng(seed)
    labels = np.zeros(shape, dtype=np.uint8)

    def cropped(spec):
        # rasterize on a generous canvas and crop, so walks never overflow
        big = rasterize(spec, (h + 300, w + 300))
        return big[150 : 150 + h, 150 : 150 + w]

    cap = rasterize(Grid(spacing=14, line_width=1), shape)
    labels[cap > 0] = 3
    vein = cropped(
        RandomWalkVessel(
            60, 0.3, seed=seed * 7 + 1, start=(150 + 10.0, 150 + h * 0.7), heading=-0.2
        )
    )
    labels[vein > 0] = 2
    artery = cropped(
        CircularArc(
            min(h, w) * 0.3, math.pi * 0.9, (150 + w * 0.5, 150 + h * 0.5), start_angle=0.4
        )
    )
    labels[artery > 0] = 1

    projection = (rng.random(shape) * 120 + labels.astype(float) * 30).clip(0, 255)
    eye_dir = root / eye_id
    eye_dir.mkdir(parents=True, exist_ok=True)
    Image.fromarray(projection.astype(np.uint8)).save(eye_dir / "projection.png")
    Image.fromarray(labels).save(eye_dir / "labels.png")
    return eye_dir


def default_test_config(input_root, output_root, **overrides):
    from vesselmark.config import PipelineConfig
    from vesselmark.raster import LabelMapping

    kwargs = dict(
        input_root=input_root,
        output_root=output_root,
        label_mapping=LabelMapping(artery={1}, vein={2}, capillary={3}),
    )
    kwargs.update(overrides)
    return PipelineConfig(**kwargs)
