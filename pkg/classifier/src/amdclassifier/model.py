"""Single-channel ResNet-18 with a one-logit head.

The first convolution of the ImageNet-pretrained backbone is replaced by a
1-channel layer whose weights are the channel mean of the pretrained RGB
filters; the fully connected layer becomes a single neuron producing one
logit. When pretrained weights cannot be fetched the model falls back to
random initialization with a recorded warning.
"""

from __future__ import annotations

import warnings

import torch
from torch import nn
from torchvision import models

# ImageNet-1K per-channel statistics, collapsed to one channel by the mean
IMAGENET_RGB_MEAN = (0.485, 0.456, 0.406)
IMAGENET_RGB_STD = (0.229, 0.224, 0.225)
GRAY_MEAN = sum(IMAGENET_RGB_MEAN) / 3.0
GRAY_STD = sum(IMAGENET_RGB_STD) / 3.0


class PretrainedWeightsUnavailable(UserWarning):
    """Pretrained weights could not be loaded; the backbone is random-init."""


def adapt_first_conv(conv: nn.Conv2d) -> nn.Conv2d:
    """1-channel convolution whose weights average the RGB filters."""
    if conv.in_channels == 1:
        return conv
    adapted = nn.Conv2d(
        1,
        conv.out_channels,
        kernel_size=conv.kernel_size,
        stride=conv.stride,
        padding=conv.padding,
        bias=conv.bias is not None,
    )
    with torch.no_grad():
        adapted.weight.copy_(conv.weight.mean(dim=1, keepdim=True))
        if conv.bias is not None:
            adapted.bias.copy_(conv.bias)
    return adapted


def build_model(pretrained: bool = True) -> tuple[nn.Module, bool]:
    """ResNet-18 accepting 1-channel input and emitting one logit.

    Returns the model and whether pretrained weights were actually used.
    """
    loaded_pretrained = False
    if pretrained:
        try:
            base = models.resnet18(weights=models.ResNet18_Weights.IMAGENET1K_V1)
            loaded_pretrained = True
        except Exception as exc:
            warnings.warn(
                f"pretrained ResNet-18 weights unavailable ({exc}); using random init",
                PretrainedWeightsUnavailable,
                stacklevel=2,
            )
            base = models.resnet18(weights=None)
    else:
        base = models.resnet18(weights=None)

    base.conv1 = adapt_first_conv(base.conv1)
    base.fc = nn.Linear(base.fc.in_features, 1)
    return base, loaded_pretrained


def backbone_parameters(model: nn.Module):
    """Every parameter except the classification head."""
    head = set(id(p) for p in model.fc.parameters())
    return [p for p in model.parameters() if id(p) not in head]


def set_backbone_trainable(model: nn.Module, trainable: bool) -> None:
    """Freeze or unfreeze everything but the head.

    Freezing also puts the backbone modules into eval mode so batch-norm
    running statistics stay bit-identical during warmup.
    """
    for p in backbone_parameters(model):
        p.requires_grad = trainable
    if not trainable:
        for name, module in model.named_children():
            if name != "fc":
                module.eval()


def normalize_input(x: torch.Tensor) -> torch.Tensor:
    """Apply the channel-collapsed ImageNet normalization."""
    return (x - GRAY_MEAN) / GRAY_STD
