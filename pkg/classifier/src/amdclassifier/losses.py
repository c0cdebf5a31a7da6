"""Binary focal loss with logits.

loss = -alpha_eff * (1 - p_t)^gamma * log(p_t), with p_t the probability
assigned to the true class and alpha_eff = alpha_t for positives,
1 - alpha_t for negatives. gamma = 0 with alpha_t = 0.5 reduces to half the
standard binary cross-entropy.
"""

from __future__ import annotations

import math

import torch

DEFAULT_ALPHA_T = 0.75
DEFAULT_GAMMA = 2.0

_LOG_FLOOR = 1e-12


def focal_loss(
    logits: torch.Tensor,
    targets: torch.Tensor,
    alpha_t: float = DEFAULT_ALPHA_T,
    gamma: float = DEFAULT_GAMMA,
    reduction: str = "mean",
) -> torch.Tensor:
    """Focal loss on raw logits; targets are 0/1."""
    if logits.shape != targets.shape:
        raise ValueError(f"logits {tuple(logits.shape)} vs targets {tuple(targets.shape)}")
    y = targets.to(logits.dtype)
    # log p_t via logsigmoid keeps extreme logits numerically stable
    log_p_t = y * torch.nn.functional.logsigmoid(logits) + (1.0 - y) * (
        torch.nn.functional.logsigmoid(-logits)
    )
    log_p_t = log_p_t.clamp_min(math.log(_LOG_FLOOR))
    p_t = torch.exp(log_p_t)
    alpha_eff = alpha_t * y + (1.0 - alpha_t) * (1.0 - y)
    loss = -alpha_eff * (1.0 - p_t) ** gamma * log_p_t
    if reduction == "mean":
        return loss.mean()
    if reduction == "sum":
        return loss.sum()
    if reduction == "none":
        return loss
    raise ValueError(f"unknown reduction {reduction!r}")
