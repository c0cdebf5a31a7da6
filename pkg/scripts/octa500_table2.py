#!/usr/bin/env python3
"""Produce the per-variant classification summary CSV for OCTA-500.

The full run is dataset-gated: it needs a local copy of OCTA-500 (gated
download, not distributed here) and hours of training, so the published
result tables are NOT reproduced or asserted by the test suite. This script
exists so that, when the dataset is present, the complete experiment can be
driven end to end:

    1. `vesselmark run --config <cfg>` over the OCTA-500 projections and
       multilabel rasters (artery/vein/capillary label values are
       dataset-specific and must be set in the config).
    2. For each of the 24 attention variants (3 vessel types x
       {tortuosity, dropout} x 4 smoothing scales), train the
       cross-validated classifier on the fused rasters via the
       `amdclassifier` package and collect per-fold metrics.
    3. Aggregate mean +/- std per variant into one CSV row.

`--dry-run` emits the 24-row CSV skeleton (variant columns filled, metric
columns empty) without touching the dataset, which pins the output shape.

Usage:
    octa500_table2.py --dry-run --output table2.csv
    octa500_table2.py --fused-root out/ --labels labels.csv --output table2.csv
"""

import argparse
import csv
import sys

VESSELS = ["artery", "vein", "capillary"]
FAMILIES = ["tortuosity", "dropout"]
FACTORS = [0.02, 0.04, 0.06, 0.08]

METRIC_COLUMNS = [
    "bal_acc_mean", "bal_acc_std",
    "specificity_mean", "specificity_std",
    "sensitivity_mean", "sensitivity_std",
    "auroc_mean", "auroc_std",
]


def variant_rows():
    for vessel in VESSELS:
        for family in FAMILIES:
            for factor in FACTORS:
                yield vessel, family, factor


def write_csv(path, results):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vessel", "family", "scale_factor", *METRIC_COLUMNS])
        for vessel, family, factor in variant_rows():
            metrics = results.get((vessel, family, factor), {})
            writer.writerow(
                [vessel, family, factor]
                + [metrics.get(c, "") for c in METRIC_COLUMNS]
            )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--output", required=True, help="Destination CSV path.")
    parser.add_argument("--dry-run", action="store_true",
                        help="Emit the 24-row CSV skeleton without training.")
    parser.add_argument("--fused-root", default=None,
                        help="vesselmark output root holding fused rasters per eye.")
    parser.add_argument("--labels", default=None,
                        help="CSV with eye_id,label rows (1 = AMD, 0 = normal).")
    parser.add_argument("--folds", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if args.dry_run:
        write_csv(args.output, {})
        print(f"wrote shaped CSV skeleton: {args.output}")
        return 0

    if not args.fused_root or not args.labels:
        parser.error("--fused-root and --labels are required without --dry-run")

    # dataset-gated path: train every variant with the classifier harness
    from amdclassifier.data import load_eye_labels, load_fused_dataset
    from amdclassifier.training import TrainConfig, cross_validate

    eye_labels = load_eye_labels(args.labels)
    results = {}
    for vessel, family, factor in variant_rows():
        images, labels, _ = load_fused_dataset(
            args.fused_root, vessel, family, factor, eye_labels
        )
        agg = cross_validate(
            images, labels, TrainConfig(folds=args.folds, seed=args.seed)
        )
        results[(vessel, family, factor)] = {
            "bal_acc_mean": agg.balanced_accuracy.mean,
            "bal_acc_std": agg.balanced_accuracy.std,
            "specificity_mean": agg.specificity.mean,
            "specificity_std": agg.specificity.std,
            "sensitivity_mean": agg.sensitivity.mean,
            "sensitivity_std": agg.sensitivity.std,
            "auroc_mean": agg.auroc.mean,
            "auroc_std": agg.auroc.std,
        }
        print(f"{vessel}/{family}/f={factor}: "
              f"bal acc {agg.balanced_accuracy.mean:.3f} +/- {agg.balanced_accuracy.std:.3f}")
    write_csv(args.output, results)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
