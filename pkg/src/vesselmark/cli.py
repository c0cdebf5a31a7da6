"""Command-line interface.

Exit codes: 0 success, 2 usage/config error, 3 partial batch failure,
4 total batch failure. `VESSELMARK_LOG` sets the log level.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import sys
from collections import defaultdict
from pathlib import Path

import click
import numpy as np

from .config import PipelineConfig
from .phantoms import rasterize, spec_from_dict, spec_to_dict
from .pipeline import MANIFEST_NAME, STATS_NAME, PipelineError, run_pipeline
from .raster import GrayRaster, save_gray


@click.group()
def main():
    level = os.environ.get("VESSELMARK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="YAML pipeline config.")
@click.option("--input", "input_dir", type=click.Path(file_okay=False), default=None,
              help="Override the configured input root.")
@click.option("--output", "output_dir", type=click.Path(file_okay=False), default=None,
              help="Override the configured output root.")
@click.option("--workers", type=int, default=None, help="Worker process count.")
def run(config_path, input_dir, output_dir, workers):
    """Run the batch pipeline over every eye under the input root."""
    try:
        cfg = PipelineConfig.from_file(config_path).override(
            input_root=Path(input_dir) if input_dir else None,
            output_root=Path(output_dir) if output_dir else None,
            workers=workers,
        )
    except (ValueError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    try:
        manifest = run_pipeline(cfg)
    except PipelineError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    failed = manifest.failed_eyes
    total = len(manifest.eyes)
    click.echo(f"{total - len(failed)}/{total} eyes processed; manifest: "
               f"{cfg.output_root / MANIFEST_NAME}")
    if not failed:
        sys.exit(0)
    for eye in failed:
        click.echo(f"failed: {eye}: {manifest.eyes[eye]['error']}", err=True)
    sys.exit(4 if len(failed) == total else 3)


@main.command("gen-phantom")
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help='Phantom JSON with "kind", its parameters, and "dims": [height, width].')
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
              help="Output directory.")
def gen_phantom(spec_path, out_dir):
    """Rasterize a synthetic vessel phantom to a mask PNG plus spec JSON."""
    try:
        payload = json.loads(Path(spec_path).read_text())
        dims = payload.pop("dims")
        spec = spec_from_dict(payload)
        mask = rasterize(spec, (int(dims[0]), int(dims[1])))
    except (KeyError, ValueError, TypeError) as exc:
        click.echo(f"bad phantom spec: {exc}", err=True)
        sys.exit(2)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(spec_path).stem
    mask_path = out / f"{stem}_mask.png"
    save_gray(GrayRaster(mask * np.uint8(255), bit_depth=8), mask_path)
    echo = spec_to_dict(spec)
    echo["dims"] = [int(dims[0]), int(dims[1])]
    (out / f"{stem}_spec.json").write_text(json.dumps(echo, indent=2, sort_keys=True))
    click.echo(f"wrote {mask_path} ({int(mask.sum())} foreground pixels)")


@main.command()
@click.option("--eye", required=True, help="Eye id (output subdirectory name).")
@click.option("--output", "output_dir", type=click.Path(file_okay=False), default=".",
              help="Pipeline output root holding <eye>/segments.csv.")
def stats(eye, output_dir):
    """Summarize the per-segment statistics of one processed eye."""
    path = Path(output_dir) / eye / STATS_NAME
    if not path.is_file():
        click.echo(f"no statistics for eye {eye} under {output_dir}", err=True)
        sys.exit(2)
    rows = list(csv.DictReader(path.open()))
    by_type = defaultdict(list)
    for row in rows:
        by_type[row["vessel_type"]].append(row)
    click.echo(f"eye {eye}: {len(rows)} segments")
    for vessel, entries in sorted(by_type.items()):
        ts = [float(r["T"]) for r in entries if not math.isnan(float(r["T"]))]
        selected = sum(1 for r in entries if r["selected"] == "true")
        mean_t = sum(ts) / len(ts) if ts else float("nan")
        max_t = max(ts) if ts else float("nan")
        click.echo(
            f"  {vessel}: {len(entries)} edges, {selected} selected, "
            f"mean T {mean_t:.4f}, max T {max_t:.4f}"
        )


if __name__ == "__main__":
    main()
