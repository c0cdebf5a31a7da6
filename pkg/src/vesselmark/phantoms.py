"""Rasterized vessel phantoms with analytically known geometry.

These are the independent oracles for the tortuosity and density pipelines:
open curves (line, circular arc, sine arch) whose continuous arc-chord ratio
is available in closed form or by adaptive quadrature, plus grid and
random-walk structures for density and batch tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class StraightLine:
    start: tuple[float, float]
    end: tuple[float, float]


@dataclass(frozen=True)
class CircularArc:
    radius: float
    sweep: float  # radians
    center: tuple[float, float]
    start_angle: float = 0.0


@dataclass(frozen=True)
class SineArch:
    """y = A sin(2 pi x / wavelength) over x in [0, periods * wavelength]."""

    amplitude: float
    wavelength: float
    periods: float = 0.5
    origin: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Grid:
    spacing: int
    line_width: int = 1


@dataclass(frozen=True)
class RandomWalkVessel:
    """Unit-step heading random walk; turn angles are N(0, turn_sigma)."""

    step_count: int
    turn_sigma: float
    seed: int
    start: tuple[float, float] = (0.0, 0.0)
    heading: float = 0.0


PhantomKind = StraightLine | CircularArc | SineArch | Grid | RandomWalkVessel

_KIND_NAMES = {
    StraightLine: "straight_line",
    CircularArc: "circular_arc",
    SineArch: "sine_arch",
    Grid: "grid",
    RandomWalkVessel: "random_walk",
}
_KIND_BY_NAME = {v: k for k, v in _KIND_NAMES.items()}


def _curve_points(spec: PhantomKind) -> np.ndarray:
    """Dense sample of the continuous curve, spaced well under one pixel."""
    if isinstance(spec, StraightLine):
        p0, p1 = np.asarray(spec.start), np.asarray(spec.end)
        n = max(2, int(math.ceil(np.linalg.norm(p1 - p0) / 0.25)) + 1)
        t = np.linspace(0.0, 1.0, n)[:, None]
        return p0 + t * (p1 - p0)
    if isinstance(spec, CircularArc):
        arc_len = spec.radius * abs(spec.sweep)
        n = max(2, int(math.ceil(arc_len / 0.25)) + 1)
        theta = spec.start_angle + np.linspace(0.0, spec.sweep, n)
        cx, cy = spec.center
        return np.stack(
            [cx + spec.radius * np.cos(theta), cy + spec.radius * np.sin(theta)], axis=1
        )
    if isinstance(spec, SineArch):
        span = spec.periods * spec.wavelength
        # arc length is at most span * sqrt(1 + (2 pi A / wavelength)^2)
        bound = span * math.hypot(1.0, 2.0 * math.pi * spec.amplitude / spec.wavelength)
        n = max(2, int(math.ceil(bound / 0.25)) + 1)
        x = np.linspace(0.0, span, n)
        y = spec.amplitude * np.sin(2.0 * math.pi * x / spec.wavelength)
        ox, oy = spec.origin
        return np.stack([ox + x, oy + y], axis=1)
    if isinstance(spec, RandomWalkVessel):
        verts = _walk_vertices(spec)
        # resample each unit segment finely
        pts = [verts[0]]
        for a, b in zip(verts[:-1], verts[1:]):
            seg = np.linalg.norm(b - a)
            n = max(2, int(math.ceil(seg / 0.25)) + 1)
            t = np.linspace(0.0, 1.0, n)[1:, None]
            pts.extend(a + t * (b - a))
        return np.asarray(pts)
    raise TypeError(f"{type(spec).__name__} is not an open curve")


def _walk_vertices(spec: RandomWalkVessel) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    heading = spec.heading
    pos = np.asarray(spec.start, dtype=np.float64)
    verts = [pos.copy()]
    for _ in range(spec.step_count):
        heading += rng.normal(0.0, spec.turn_sigma)
        pos = pos + np.array([math.cos(heading), math.sin(heading)])
        verts.append(pos.copy())
    return np.asarray(verts)


def rasterize(spec: PhantomKind, dims: tuple[int, int]) -> np.ndarray:
    """Rasterize a phantom into a binary mask of shape (height, width).

    Open curves become 8-connected one-pixel-wide traces; grids are filled
    line lattices. Deterministic given the phantom parameters, seed included.
    """
    h, w = dims
    mask = np.zeros((h, w), dtype=np.uint8)
    if isinstance(spec, Grid):
        if spec.spacing < 2 or spec.line_width < 1:
            raise ValueError("grid needs spacing >= 2 and line_width >= 1")
        for x in range(0, w, spec.spacing):
            mask[:, x : min(x + spec.line_width, w)] = 1
        for y in range(0, h, spec.spacing):
            mask[y : min(y + spec.line_width, h), :] = 1
        return mask
    pts = _curve_points(spec)
    pix = np.rint(pts).astype(np.int64)
    if pix[:, 0].min() < 0 or pix[:, 0].max() >= w or pix[:, 1].min() < 0 or pix[:, 1].max() >= h:
        raise ValueError(f"phantom exceeds {w}x{h} raster")
    mask[pix[:, 1], pix[:, 0]] = 1
    return mask


def analytic_tortuosity(spec: PhantomKind) -> float:
    """Continuous arc-length / chord ratio of an open-curve phantom.

    Closed form for lines and circular arcs, adaptive quadrature for sine
    arches, exact polyline ratio for random walks. Closed or filled phantoms
    have no defined value.
    """
    if isinstance(spec, StraightLine):
        if spec.start == spec.end:
            raise ValueError("degenerate line: coincident endpoints")
        return 1.0
    if isinstance(spec, CircularArc):
        sweep = abs(spec.sweep)
        if sweep <= 0:
            raise ValueError("arc sweep must be positive")
        if sweep >= 2.0 * math.pi:
            raise ValueError("closed arc: chord is zero")
        return sweep / (2.0 * math.sin(sweep / 2.0))
    if isinstance(spec, SineArch):
        span = spec.periods * spec.wavelength
        k = 2.0 * math.pi / spec.wavelength

        def speed(x: float) -> float:
            return math.hypot(1.0, spec.amplitude * k * math.cos(k * x))

        arc, _ = integrate.quad(speed, 0.0, span, limit=200)
        y_end = spec.amplitude * math.sin(k * span)
        chord = math.hypot(span, y_end)
        if chord == 0.0:
            raise ValueError("closed sine curve: chord is zero")
        return arc / chord
    if isinstance(spec, RandomWalkVessel):
        verts = _walk_vertices(spec)
        chord = float(np.linalg.norm(verts[-1] - verts[0]))
        if chord == 0.0:
            raise ValueError("walk returned to its start: chord is zero")
        return float(spec.step_count) / chord
    raise TypeError(f"{type(spec).__name__} is not a single open curve")


def spec_to_dict(spec: PhantomKind) -> dict:
    d = asdict(spec)
    d["kind"] = _KIND_NAMES[type(spec)]
    return d


def spec_from_dict(d: dict) -> PhantomKind:
    d = dict(d)
    kind = _KIND_BY_NAME[d.pop("kind")]
    for key in ("start", "end", "center", "origin"):
        if key in d and d[key] is not None:
            d[key] = tuple(d[key])
    return kind(**d)


def spec_to_json(spec: PhantomKind) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True)


def spec_from_json(text: str) -> PhantomKind:
    return spec_from_dict(json.loads(text))
