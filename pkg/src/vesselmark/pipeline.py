"""Batch driver: per-eye biomarker heatmaps, fusion, statistics, manifest.

Each eye is independent: the worker loads the projection and label raster,
derives per-vessel-type masks, runs the tortuosity and dropout branches at
every smoothing scale, fuses the attention maps with the projection, and
writes heatmaps (16-bit PNG + JSON sidecar), fused rasters, and a per-edge
statistics CSV. A failing eye is recorded in the manifest without aborting
the batch.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import PipelineConfig
from .density import (
    dropout_multiscale,
    local_density,
    normalize_p99,
    sparsity,
    sparsity_impulse,
)
from .fusion import align_weights, attention_weights, fuse
from .graph import VesselGraph, extract_graph, graph_stats, with_weights
from .morphology import remove_small_components, skeletonize
from .raster import (
    VesselType,
    load_gray,
    load_labels,
    normalize,
    quantize,
    save_gray,
    split_labels,
)
from .smoothing import HeatmapFamily
from .tortuosity import (
    build_impulse_map,
    eligible_indices,
    gaussian_multiscale,
    normalize_attention,
    segment_weight,
    select_high_tortuosity,
)

log = logging.getLogger("vesselmark")

MANIFEST_SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"
STATS_NAME = "segments.csv"

STATS_COLUMNS = [
    "eye_id",
    "vessel_type",
    "edge_id",
    "N",
    "L",
    "C",
    "T",
    "T_excess",
    "selected",
    "w",
]


class PipelineError(RuntimeError):
    """Unrecoverable batch-level failure (bad input root, no eyes, ...)."""


@dataclass(frozen=True)
class RunManifest:
    config: dict
    eyes: dict
    tool_version: str = __version__
    schema_version: int = MANIFEST_SCHEMA_VERSION

    @property
    def failed_eyes(self) -> list[str]:
        return [e for e, entry in self.eyes.items() if entry["status"] != "ok"]

    @property
    def all_outputs(self) -> list[str]:
        out: list[str] = []
        for entry in self.eyes.values():
            out.extend(entry.get("outputs", []))
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "config": self.config,
            "eyes": self.eyes,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def discover_eyes(config: PipelineConfig) -> list[str]:
    """Eye ids: subdirectories of the input root holding a projection file."""
    root = config.input_root
    if not root.is_dir():
        raise PipelineError(f"input root does not exist: {root}")
    eyes = sorted(
        p.name
        for p in root.iterdir()
        if p.is_dir() and (p / config.projection_pattern).is_file()
    )
    if not eyes:
        raise PipelineError(f"no eyes found under {root}")
    return eyes


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _map_stem(vessel: VesselType, family: HeatmapFamily, factor: float) -> str:
    return f"{vessel}_{family}_f{factor:g}"


@dataclass
class _TypeResult:
    graph: VesselGraph
    stats: list  # SegmentStats with weights filled for selected edges
    selected: set[int]


def _save_heatmap_products(
    out_dir: Path,
    eye_id: str,
    projection: np.ndarray,
    attention_map: np.ndarray,
    sidecar: dict,
    vessel: VesselType,
    family: HeatmapFamily,
    factor: float,
    config: PipelineConfig,
    outputs: list[str],
) -> None:
    stem = _map_stem(vessel, family, factor)
    heat_png = out_dir / f"{stem}_heatmap.png"
    save_gray(quantize(attention_map, bit_depth=16), heat_png)
    heat_json = out_dir / f"{stem}_heatmap.json"
    heat_json.write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    outputs.extend([str(heat_png), str(heat_json)])

    weights = attention_weights(attention_map, config.attention)
    weights = align_weights(weights, projection.shape)
    fused = fuse(projection, weights, eye_id, vessel, family, factor)
    fused_png = out_dir / f"{stem}.png"
    save_gray(quantize(fused.data, bit_depth=16, clamp=True), fused_png)
    fused_json = out_dir / f"{stem}.json"
    fused_json.write_text(
        json.dumps(
            {
                "eye_id": eye_id,
                "vessel_type": str(vessel),
                "family": str(family),
                "scale_factor": factor,
                "atten_min": config.attention.atten_min,
                "atten_max": config.attention.atten_max,
                "source_heatmap": heat_png.name,
            },
            indent=2,
            sort_keys=True,
        )
    )
    outputs.extend([str(fused_png), str(fused_json)])


def process_eye(eye_id: str, config: PipelineConfig) -> dict:
    """Run the full per-eye pipeline; returns the manifest entry."""
    t0 = time.perf_counter()
    in_dir = config.input_root / eye_id
    out_dir = config.output_root / eye_id
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    map_summaries: dict[str, dict] = {}

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")

        proj_path = in_dir / config.projection_pattern
        labels_path = in_dir / config.labels_pattern
        projection = normalize(load_gray(proj_path, channel=config.channel)).data
        labels = load_labels(labels_path)
        if (labels.height, labels.width) != projection.shape:
            raise ValueError(
                f"labels {labels.data.shape} and projection {projection.shape} disagree"
            )
        masks = split_labels(labels, config.label_mapping, strict=config.strict_labels)

        per_type: dict[VesselType, _TypeResult] = {}
        for vessel in VesselType:
            mask = masks[vessel]
            if config.preprocess[vessel]:
                mask = remove_small_components(mask, config.min_component_size)
            skel = skeletonize(mask)
            graph = extract_graph(skel)
            stats = graph_stats(graph)

            eligible = eligible_indices(stats, config.min_edge_pixels)
            local_sel = select_high_tortuosity(
                [stats[i] for i in eligible], config.percentile
            )
            selected = [eligible[j] for j in local_sel]
            weight_by_edge = {
                i: segment_weight(
                    stats[i].pixel_count,
                    stats[i].excess_tortuosity,
                    config.alpha,
                    config.beta,
                )
                for i in selected
            }
            per_type[vessel] = _TypeResult(
                graph, with_weights(stats, weight_by_edge), set(selected)
            )

            # tortuosity branch
            impulse = build_impulse_map(
                [graph.edges[i] for i in selected],
                [weight_by_edge[i] for i in selected],
                projection.shape,
            )
            heatmaps = gaussian_multiscale(impulse, config.scale_factors, vessel)
            impulse_mass = float(impulse.sum())
            for factor, sigma, blurred in zip(
                heatmaps.scale_factors, heatmaps.sigmas, heatmaps.maps
            ):
                sidecar = {
                    "eye_id": eye_id,
                    "vessel_type": str(vessel),
                    "family": str(HeatmapFamily.TORTUOSITY),
                    "f": factor,
                    "sigma": sigma,
                    "M": int(max(projection.shape)),
                    "percentile": config.percentile,
                    "alpha": config.alpha,
                    "beta": config.beta,
                    "total_impulse_mass": impulse_mass,
                }
                if config.tortuosity_p99:
                    blurred, p99 = normalize_p99(blurred)
                    sidecar["p99"] = p99
                attention = normalize_attention(blurred)
                _save_heatmap_products(
                    out_dir, eye_id, projection, attention, sidecar,
                    vessel, HeatmapFamily.TORTUOSITY, factor, config, outputs,
                )
                map_summaries[_map_stem(vessel, HeatmapFamily.TORTUOSITY, factor)] = {
                    "sigma": sigma,
                    "impulse_mass": impulse_mass,
                }

            # dropout branch
            density = local_density(mask, config.disk_radius[vessel])
            sparse = sparsity(density)
            support = skel if config.density_support == "skeleton" else mask
            d_impulse = sparsity_impulse(support, sparse, config.sparsity_threshold)
            d_heatmaps = dropout_multiscale(d_impulse, config.scale_factors, vessel)
            d_mass = float(d_impulse.sum())
            for factor, sigma, blurred in zip(
                d_heatmaps.scale_factors, d_heatmaps.sigmas, d_heatmaps.maps
            ):
                normalized, p99 = normalize_p99(blurred)
                sidecar = {
                    "eye_id": eye_id,
                    "vessel_type": str(vessel),
                    "family": str(HeatmapFamily.DROPOUT),
                    "f": factor,
                    "sigma": sigma,
                    "M": int(max(projection.shape)),
                    "disk_radius": config.disk_radius[vessel],
                    "sparsity_threshold": config.sparsity_threshold,
                    "p99": p99,
                    "total_impulse_mass": d_mass,
                }
                attention = normalize_attention(normalized)
                _save_heatmap_products(
                    out_dir, eye_id, projection, attention, sidecar,
                    vessel, HeatmapFamily.DROPOUT, factor, config, outputs,
                )
                map_summaries[_map_stem(vessel, HeatmapFamily.DROPOUT, factor)] = {
                    "sigma": sigma,
                    "impulse_mass": d_mass,
                }

        stats_path = out_dir / STATS_NAME
        emit_stats(eye_id, per_type, stats_path)
        outputs.append(str(stats_path))

        input_hashes = {
            config.projection_pattern: _sha256(proj_path),
            config.labels_pattern: _sha256(labels_path),
        }

    return {
        "status": "ok",
        "input_hashes": input_hashes,
        "outputs": sorted(outputs),
        "maps": map_summaries,
        "warnings": sorted({str(w.message) for w in caught}),
        "duration_s": round(time.perf_counter() - t0, 6),
    }


def _process_eye_entry(args: tuple[str, PipelineConfig]) -> tuple[str, dict]:
    eye_id, config = args
    try:
        return eye_id, process_eye(eye_id, config)
    except Exception as exc:  # per-eye isolation: one bad eye never aborts the batch
        log.exception("eye %s failed", eye_id)
        return eye_id, {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Process every discovered eye and write the run manifest."""
    eyes = discover_eyes(config)
    config.output_root.mkdir(parents=True, exist_ok=True)

    jobs = [(eye, config) for eye in eyes]
    if config.workers == 1:
        results = [_process_eye_entry(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_process_eye_entry, jobs))

    manifest = RunManifest(config=config.to_dict(), eyes=dict(sorted(results)))
    manifest.save(config.output_root / MANIFEST_NAME)
    ok = len(eyes) - len(manifest.failed_eyes)
    log.info("processed %d/%d eyes", ok, len(eyes))
    return manifest


def emit_stats(eye_id: str, per_type: dict[VesselType, _TypeResult], path) -> None:
    """Per-edge statistics CSV: one row per edge, all vessel types."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STATS_COLUMNS)
        for vessel in VesselType:
            result = per_type.get(vessel)
            if result is None:
                continue
            for edge_id, s in enumerate(result.stats):
                writer.writerow(
                    [
                        eye_id,
                        str(vessel),
                        edge_id,
                        s.pixel_count,
                        f"{s.curve_length:.9g}",
                        f"{s.chord_length:.9g}",
                        f"{s.tortuosity:.9g}",
                        f"{s.excess_tortuosity:.9g}",
                        str(edge_id in result.selected).lower(),
                        f"{s.weight:.9g}",
                    ]
                )
