"""GradCAM saliency over the last convolutional block."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from .model import normalize_input


def gradcam(model, image: torch.Tensor) -> np.ndarray:
    """Class-activation map for one image, upsampled to input size in [0, 1].

    ``image`` is (1, H, W) or (H, W) in [0, 1]. Activations and gradients are
    taken at the output of ``layer4``; channel weights are the spatial means
    of the gradients. The map is scaled by its maximum (an all-zero map stays
    zero), so a spatially uniform response stays uniform.
    """
    if image.dim() == 2:
        image = image.unsqueeze(0)
    x = image.unsqueeze(0).to(torch.float32).clone().requires_grad_(True)

    captured: dict[str, torch.Tensor] = {}

    def fwd_hook(_m, _i, out):
        captured["act"] = out
        out.retain_grad()

    handle = model.layer4.register_forward_hook(fwd_hook)
    was_training = model.training
    model.eval()
    try:
        logit = model(normalize_input(x)).squeeze()
        model.zero_grad(set_to_none=True)
        logit.backward()
    finally:
        handle.remove()
        if was_training:
            model.train()

    acts = captured["act"]
    grads = acts.grad
    weights = grads.mean(dim=(2, 3), keepdim=True)
    cam = F.relu((weights * acts).sum(dim=1, keepdim=True))
    cam = F.interpolate(cam, size=image.shape[-2:], mode="bilinear", align_corners=False)
    cam = cam.squeeze().detach().numpy()
    peak = cam.max()
    if peak > 0:
        cam = cam / peak
    return cam


def save_overlay(cam: np.ndarray, image: torch.Tensor, path) -> None:
    """Write the input image with the CAM blended in as a red channel."""
    base = image.squeeze().detach().numpy()
    base = np.clip(base, 0.0, 1.0)
    rgb = np.stack([base, base, base], axis=-1)
    alpha = 0.5 * cam[..., None]
    heat = np.zeros_like(rgb)
    heat[..., 0] = 1.0
    blended = (1.0 - alpha) * rgb + alpha * heat
    Image.fromarray((blended * 255).astype(np.uint8)).save(path)
