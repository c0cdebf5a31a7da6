"""Two-stage training protocol with stratified cross-validation.

Stage one (warmup) freezes the backbone, batch-norm statistics included, and
optimizes the head alone at 1e-3 for two epochs; stage two unfreezes
everything at 1e-4 with a reduce-on-plateau schedule (factor 0.5, patience 2)
driven by validation balanced accuracy. Both stages use Adam with weight
decay 1e-4 and batch size 16. The checkpoint with the highest validation
balanced accuracy is selected, ties breaking toward the earlier epoch.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import torch

from .folds import stratified_folds
from .losses import DEFAULT_ALPHA_T, DEFAULT_GAMMA, focal_loss
from .metrics import (
    AggregateResult,
    FoldResult,
    auroc,
    balanced_accuracy,
    sensitivity,
    specificity,
)
from .model import build_model, normalize_input, set_backbone_trainable


class FoldDivergence(RuntimeError):
    """Training loss became non-finite; the fold is aborted."""


@dataclass(frozen=True)
class TrainConfig:
    warmup_epochs: int = 2
    head_lr: float = 1e-3
    finetune_lr: float = 1e-4
    weight_decay: float = 1e-4
    batch_size: int = 16
    max_epochs: int = 20  # per fold, warmup included
    scheduler_factor: float = 0.5
    scheduler_patience: int = 2
    focal_alpha: float = DEFAULT_ALPHA_T
    focal_gamma: float = DEFAULT_GAMMA
    folds: int = 5
    input_size: int = 224
    seed: int = 0
    pretrained: bool = True

    def __post_init__(self):
        if self.max_epochs <= self.warmup_epochs:
            raise ValueError("max_epochs must exceed warmup_epochs")


@dataclass(frozen=True)
class CrossValResult:
    aggregate: AggregateResult
    failures: tuple[tuple[int, str], ...] = field(default_factory=tuple)

    @property
    def balanced_accuracy(self):
        return self.aggregate.balanced_accuracy

    @property
    def sensitivity(self):
        return self.aggregate.sensitivity

    @property
    def specificity(self):
        return self.aggregate.specificity

    @property
    def auroc(self):
        return self.aggregate.auroc

    @property
    def folds(self):
        return self.aggregate.folds


def predict_probs(model, images, batch_size: int = 16) -> torch.Tensor:
    """Sigmoid probabilities in eval mode."""
    model.eval()
    probs = []
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            xb = normalize_input(images[start : start + batch_size])
            probs.append(torch.sigmoid(model(xb).squeeze(1)))
    return torch.cat(probs) if probs else torch.empty(0)


def _run_epoch(model, optimizer, images, labels, config, generator) -> float:
    order = torch.randperm(len(images), generator=generator)
    total = 0.0
    for start in range(0, len(order), config.batch_size):
        idx = order[start : start + config.batch_size]
        xb = normalize_input(images[idx])
        yb = labels[idx]
        optimizer.zero_grad()
        logits = model(xb).squeeze(1)
        loss = focal_loss(logits, yb, config.focal_alpha, config.focal_gamma)
        if not torch.isfinite(loss):
            raise FoldDivergence(f"non-finite loss {loss.item()!r}")
        loss.backward()
        optimizer.step()
        total += float(loss.item()) * len(idx)
    return total / len(images)


def train_fold(
    train_images: torch.Tensor,
    train_labels: torch.Tensor,
    val_images: torch.Tensor,
    val_labels: torch.Tensor,
    config: TrainConfig,
    fold: int = 0,
    on_epoch_end=None,
) -> tuple[dict, FoldResult]:
    """Run the two-stage schedule; returns (best state_dict, fold metrics).

    ``on_epoch_end(epoch, model, val_balanced_accuracy)`` is invoked after
    each epoch's validation pass when provided.
    """
    if len(train_images) == 0 or len(val_images) == 0:
        raise ValueError("empty fold data")
    val_ints = val_labels.to(torch.int64)
    if len(torch.unique(val_ints)) < 2:
        raise ValueError("validation split must contain both classes")

    torch.manual_seed(config.seed * 10_000 + fold)
    model, _ = build_model(config.pretrained)
    generator = torch.Generator().manual_seed(config.seed * 20_000 + fold)

    best_acc = -math.inf
    best_state: dict = {}
    best_epoch = -1
    scheduler = None
    optimizer = None

    for epoch in range(config.max_epochs):
        warmup = epoch < config.warmup_epochs
        if epoch == 0:
            set_backbone_trainable(model, False)
            model.fc.train()
            optimizer = torch.optim.Adam(
                model.fc.parameters(), lr=config.head_lr, weight_decay=config.weight_decay
            )
        elif epoch == config.warmup_epochs:
            set_backbone_trainable(model, True)
            optimizer = torch.optim.Adam(
                model.parameters(), lr=config.finetune_lr, weight_decay=config.weight_decay
            )
            # plateau schedule only makes sense in the longer fine-tune stage
            scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
                optimizer,
                mode="max",
                factor=config.scheduler_factor,
                patience=config.scheduler_patience,
            )
        if warmup:
            # keep frozen batch-norm statistics bit-identical
            set_backbone_trainable(model, False)
            model.fc.train()
        else:
            model.train()

        _run_epoch(model, optimizer, train_images, train_labels, config, generator)

        probs = predict_probs(model, val_images, config.batch_size)
        preds = (probs > 0.5).to(torch.int64)
        acc = balanced_accuracy(val_ints.numpy(), preds.numpy())
        if scheduler is not None:
            scheduler.step(acc)
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
        if on_epoch_end is not None:
            on_epoch_end(epoch, model, acc)

    model.load_state_dict(best_state)
    probs = predict_probs(model, val_images, config.batch_size)
    preds = (probs > 0.5).to(torch.int64)
    y = val_ints.numpy()
    result = FoldResult(
        fold=fold,
        balanced_accuracy=balanced_accuracy(y, preds.numpy()),
        sensitivity=sensitivity(y, preds.numpy()),
        specificity=specificity(y, preds.numpy()),
        auroc=auroc(y, probs.numpy()),
        best_epoch=best_epoch,
    )
    return best_state, result


def cross_validate(
    images: torch.Tensor, labels: torch.Tensor, config: TrainConfig
) -> CrossValResult:
    """Stratified k-fold evaluation; diverged folds are recorded, not fatal."""
    assignment = stratified_folds(labels.to(torch.int64).numpy(), config.folds, config.seed)
    results = []
    failures = []
    for fold in range(config.folds):
        val_mask = torch.from_numpy(assignment == fold)
        try:
            _, res = train_fold(
                images[~val_mask],
                labels[~val_mask],
                images[val_mask],
                labels[val_mask],
                config,
                fold=fold,
            )
            results.append(res)
        except FoldDivergence as exc:
            failures.append((fold, str(exc)))
    if not results:
        raise FoldDivergence(f"every fold diverged: {failures}")
    return CrossValResult(AggregateResult.of(results), tuple(failures))
