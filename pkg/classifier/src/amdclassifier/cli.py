"""Command-line harness: train one attention variant, export metrics and CAMs."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import torch

from .data import load_eye_labels, load_fused_dataset
from .gradcam import gradcam, save_overlay
from .model import build_model
from .training import CrossValResult, TrainConfig, cross_validate, train_fold
from .folds import stratified_folds

SUMMARY_COLUMNS = [
    "vessel", "family", "scale_factor",
    "bal_acc_mean", "bal_acc_std",
    "specificity_mean", "specificity_std",
    "sensitivity_mean", "sensitivity_std",
    "auroc_mean", "auroc_std",
]


def append_summary_row(path: Path, vessel, family, factor, res: CrossValResult) -> None:
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(SUMMARY_COLUMNS)
        writer.writerow(
            [
                vessel, family, factor,
                res.balanced_accuracy.mean, res.balanced_accuracy.std,
                res.specificity.mean, res.specificity.std,
                res.sensitivity.mean, res.sensitivity.std,
                res.auroc.mean, res.auroc.std,
            ]
        )


@click.group()
def main():
    pass


@main.command()
@click.option("--fused-root", required=True, type=click.Path(exists=True, file_okay=False),
              help="vesselmark output root with per-eye fused rasters.")
@click.option("--labels", "labels_csv", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="CSV of eye_id,label (1 = AMD, 0 = normal).")
@click.option("--vessel", required=True, type=click.Choice(["artery", "vein", "capillary"]))
@click.option("--family", required=True, type=click.Choice(["tortuosity", "dropout"]))
@click.option("--factor", required=True, type=float)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--max-epochs", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--input-size", type=int, default=224, show_default=True)
@click.option("--gradcam-count", type=int, default=0, show_default=True,
              help="Export CAM overlays for this many validation images of fold 0.")
def train(fused_root, labels_csv, vessel, family, factor, out_dir, folds,
          max_epochs, seed, input_size, gradcam_count):
    """Cross-validate one attention variant and write metrics + summary row."""
    out = Path(out_dir)
    variant = f"{vessel}_{family}_f{factor:g}"
    (out / variant).mkdir(parents=True, exist_ok=True)

    eye_labels = load_eye_labels(labels_csv)
    images, labels, eyes = load_fused_dataset(
        fused_root, vessel, family, factor, eye_labels, input_size=input_size
    )
    config = TrainConfig(folds=folds, max_epochs=max_epochs, seed=seed, input_size=input_size)
    result = cross_validate(images, labels, config)

    for fold_res in result.folds:
        payload = fold_res.to_dict()
        (out / variant / f"fold_{fold_res.fold}.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True)
        )
    for fold, error in result.failures:
        (out / variant / f"fold_{fold}.json").write_text(
            json.dumps({"fold": fold, "status": "diverged", "error": error}, indent=2)
        )
    append_summary_row(out / "summary.csv", vessel, family, factor, result)
    click.echo(
        f"{variant}: balanced accuracy {result.balanced_accuracy.mean:.3f} "
        f"+/- {result.balanced_accuracy.std:.3f} over {len(result.folds)} folds"
    )

    if gradcam_count > 0:
        assignment = stratified_folds(labels.to(torch.int64).numpy(), folds, seed)
        val_mask = torch.from_numpy(assignment == 0)
        state, _ = train_fold(
            images[~val_mask], labels[~val_mask],
            images[val_mask], labels[val_mask], config, fold=0,
        )
        model, _ = build_model(config.pretrained)
        model.load_state_dict(state)
        val_eyes = [e for e, m in zip(eyes, val_mask.tolist()) if m]
        for i in range(min(gradcam_count, int(val_mask.sum()))):
            cam = gradcam(model, images[val_mask][i])
            save_overlay(cam, images[val_mask][i], out / variant / f"cam_{val_eyes[i]}.png")
        click.echo(f"wrote {min(gradcam_count, int(val_mask.sum()))} GradCAM overlays")


if __name__ == "__main__":
    main()
