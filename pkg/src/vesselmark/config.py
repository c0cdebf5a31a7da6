"""Pipeline configuration: every tunable in one validated, file-backed object.

The on-disk format is YAML; `vesselmark run` loads it, applies CLI overrides,
and snapshots the effective configuration into the run manifest. The label
mapping has no default: the dataset's label encoding is dataset-specific and
silently misassigning vessel types would invalidate every downstream map.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .density import DEFAULT_DISK_RADIUS, DEFAULT_SPARSITY_THRESHOLD
from .fusion import DEFAULT_ATTEN_MAX, DEFAULT_ATTEN_MIN, AttentionBounds
from .raster import LabelMapping, VesselType
from .smoothing import DEFAULT_SCALE_FACTORS
from .tortuosity import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_MIN_EDGE_PIXELS,
    DEFAULT_PERCENTILE,
)

DENSITY_SUPPORT_CHOICES = ("mask", "skeleton")


@dataclass(frozen=True)
class PipelineConfig:
    input_root: Path
    output_root: Path
    label_mapping: LabelMapping
    strict_labels: bool = True
    projection_pattern: str = "projection.png"
    labels_pattern: str = "labels.png"
    channel: int | None = None
    percentile: float = DEFAULT_PERCENTILE
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    min_edge_pixels: int = DEFAULT_MIN_EDGE_PIXELS
    scale_factors: tuple[float, ...] = DEFAULT_SCALE_FACTORS
    disk_radius: dict[VesselType, int] = field(
        default_factory=lambda: {vt: DEFAULT_DISK_RADIUS for vt in VesselType}
    )
    sparsity_threshold: float = DEFAULT_SPARSITY_THRESHOLD
    density_support: str = "mask"
    attention: AttentionBounds = field(default_factory=AttentionBounds)
    min_component_size: int = 5
    preprocess: dict[VesselType, bool] = field(
        default_factory=lambda: {
            VesselType.ARTERY: False,
            VesselType.VEIN: False,
            VesselType.CAPILLARY: True,
        }
    )
    tortuosity_p99: bool = False
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "input_root", Path(self.input_root))
        object.__setattr__(self, "output_root", Path(self.output_root))
        object.__setattr__(self, "scale_factors", tuple(float(f) for f in self.scale_factors))
        if not (0.0 <= self.percentile <= 100.0):
            raise ValueError(f"percentile out of range: {self.percentile}")
        if not self.scale_factors or any(f <= 0 for f in self.scale_factors):
            raise ValueError(f"scale factors must be positive: {self.scale_factors}")
        if not (0.0 <= self.sparsity_threshold <= 1.0):
            raise ValueError(f"sparsity threshold out of range: {self.sparsity_threshold}")
        if self.density_support not in DENSITY_SUPPORT_CHOICES:
            raise ValueError(f"density support must be one of {DENSITY_SUPPORT_CHOICES}")
        if set(self.disk_radius) != set(VesselType) or any(
            r < 1 for r in self.disk_radius.values()
        ):
            raise ValueError("disk_radius needs a radius >= 1 for every vessel type")
        if set(self.preprocess) != set(VesselType):
            raise ValueError("preprocess needs a flag for every vessel type")
        if self.min_component_size < 1 or self.min_edge_pixels < 2:
            raise ValueError("min_component_size >= 1 and min_edge_pixels >= 2 required")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        return {
            "input_root": str(self.input_root),
            "output_root": str(self.output_root),
            "labels": {
                "artery": sorted(self.label_mapping.artery),
                "vein": sorted(self.label_mapping.vein),
                "capillary": sorted(self.label_mapping.capillary),
                "ignored": sorted(self.label_mapping.ignored),
                "strict": self.strict_labels,
            },
            "io": {
                "projection_pattern": self.projection_pattern,
                "labels_pattern": self.labels_pattern,
                "channel": self.channel,
            },
            "tortuosity": {
                "percentile": self.percentile,
                "alpha": self.alpha,
                "beta": self.beta,
                "min_edge_pixels": self.min_edge_pixels,
                "p99_normalization": self.tortuosity_p99,
            },
            "density": {
                "disk_radius": {str(vt): r for vt, r in self.disk_radius.items()},
                "sparsity_threshold": self.sparsity_threshold,
                "support": self.density_support,
            },
            "smoothing": {"scale_factors": list(self.scale_factors)},
            "attention": {
                "min": self.attention.atten_min,
                "max": self.attention.atten_max,
            },
            "preprocessing": {
                "min_component_size": self.min_component_size,
                "binarize": {str(vt): bool(b) for vt, b in self.preprocess.items()},
            },
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        try:
            labels = d["labels"]
            mapping = LabelMapping(
                artery=frozenset(labels["artery"]),
                vein=frozenset(labels["vein"]),
                capillary=frozenset(labels["capillary"]),
                ignored=frozenset(labels.get("ignored", ())),
            )
            io = d.get("io", {})
            tort = d.get("tortuosity", {})
            dens = d.get("density", {})
            radius_raw = dens.get("disk_radius", DEFAULT_DISK_RADIUS)
            if isinstance(radius_raw, dict):
                radius = {VesselType(k): int(v) for k, v in radius_raw.items()}
            else:
                radius = {vt: int(radius_raw) for vt in VesselType}
            pre = d.get("preprocessing", {})
            binarize = pre.get("binarize")
            if binarize is None:
                preprocess = {
                    VesselType.ARTERY: False,
                    VesselType.VEIN: False,
                    VesselType.CAPILLARY: True,
                }
            else:
                preprocess = {VesselType(k): bool(v) for k, v in binarize.items()}
            att = d.get("attention", {})
            return cls(
                input_root=Path(d["input_root"]),
                output_root=Path(d["output_root"]),
                label_mapping=mapping,
                strict_labels=bool(labels.get("strict", True)),
                projection_pattern=io.get("projection_pattern", "projection.png"),
                labels_pattern=io.get("labels_pattern", "labels.png"),
                channel=io.get("channel"),
                percentile=float(tort.get("percentile", DEFAULT_PERCENTILE)),
                alpha=float(tort.get("alpha", DEFAULT_ALPHA)),
                beta=float(tort.get("beta", DEFAULT_BETA)),
                min_edge_pixels=int(tort.get("min_edge_pixels", DEFAULT_MIN_EDGE_PIXELS)),
                tortuosity_p99=bool(tort.get("p99_normalization", False)),
                scale_factors=tuple(
                    d.get("smoothing", {}).get("scale_factors", DEFAULT_SCALE_FACTORS)
                ),
                disk_radius=radius,
                sparsity_threshold=float(
                    dens.get("sparsity_threshold", DEFAULT_SPARSITY_THRESHOLD)
                ),
                density_support=dens.get("support", "mask"),
                attention=AttentionBounds(
                    float(att.get("min", DEFAULT_ATTEN_MIN)),
                    float(att.get("max", DEFAULT_ATTEN_MAX)),
                ),
                min_component_size=int(pre.get("min_component_size", 5)),
                preprocess=preprocess,
                workers=int(d.get("workers", 1)),
            )
        except KeyError as exc:
            raise ValueError(f"config missing required key: {exc}") from exc

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"config file {path} is not a mapping")
        return cls.from_dict(data)

    def to_file(self, path) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)

    def override(self, **kwargs) -> "PipelineConfig":
        """Copy with CLI-level overrides applied (None values ignored)."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates) if updates else self
