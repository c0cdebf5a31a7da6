"""Skeleton-to-graph extraction and per-segment geometry.

A skeleton decomposes into nodes (pixels with one neighbor: endpoints; three
or more: bifurcations) and edges (maximal chains of two-neighbor pixels
between node pixels, the node pixels included at both ends). Traversal is
deterministic: node pixels are processed in row-major scan order and
neighbors examined clockwise starting from east.

Adjacent bifurcation pixels, a frequent thinning artifact, are merged into
one node at the cluster pixel nearest the cluster centroid. Pure cycles
(rings with no node pixel) become a single closed edge anchored at their
row-major-smallest pixel; their chord is zero by definition, so they are
flagged degenerate and excluded from tortuosity statistics.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .morphology import as_binary

GRAPH_SCHEMA_VERSION = 1

# (dx, dy) clockwise from east; y grows downward
_NEIGHBOR_ORDER = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))

_RING_KERNEL = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.int64)


class NodeKind(enum.Enum):
    ENDPOINT = "endpoint"        # exactly 1 skeleton neighbor
    BIFURCATION = "bifurcation"  # >= 3 skeleton neighbors
    ISOLATED = "isolated"        # 0 neighbors (single-pixel component)
    CYCLE = "cycle"              # anchor of a pure cycle (2 neighbors)


@dataclass(frozen=True)
class GraphNode:
    """Graph node at (x, y); ``pixels`` lists every skeleton pixel it owns.

    Merged bifurcation clusters own all their member pixels; endpoint,
    isolated, and cycle-anchor nodes own exactly one.
    """

    x: int
    y: int
    kind: NodeKind
    pixels: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class VesselEdge:
    """Ordered 8-connected pixel chain between two graph nodes.

    ``pixels`` lists each (x, y) once; for closed edges the chain implicitly
    returns from the last pixel to the first.
    """

    pixels: tuple[tuple[int, int], ...]
    node_a: int
    node_b: int
    closed: bool = False

    @property
    def pixel_count(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class SegmentStats:
    """Per-edge geometry: pixel count, curve/chord length, tortuosity, weight."""

    pixel_count: int
    curve_length: float
    chord_length: float
    tortuosity: float
    excess_tortuosity: float
    weight: float = 0.0
    degenerate: bool = False


@dataclass(frozen=True)
class VesselGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[VesselEdge, ...]
    width: int
    height: int


def excess_tortuosity(tortuosity: float) -> float:
    """Excess over the straight-line floor T = 1.

    Kept as a single substitutable definition: every consumer of the excess
    quantity goes through here.
    """
    return tortuosity - 1.0


def _orient(pixels: list[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    # deterministic orientation: start at the lexicographically smaller endpoint
    if pixels[-1] < pixels[0]:
        pixels = pixels[::-1]
    return tuple(pixels)


def extract_graph(skeleton: np.ndarray) -> VesselGraph:
    """Decompose a skeleton into nodes and pixel-chain edges.

    Every skeleton pixel belongs to exactly one edge interior or is a node
    pixel. Deterministic for a fixed input.
    """
    sk = as_binary(skeleton)
    h, w = sk.shape
    fg = sk.astype(bool)
    degree = ndimage.convolve(sk.astype(np.int64), _RING_KERNEL, mode="constant", cval=0)
    degree[~fg] = -1

    is_node = fg & (degree != 2)

    # merge clusters of adjacent bifurcation pixels into single nodes
    bif = fg & (degree >= 3)
    cluster_labels, n_clusters = ndimage.label(bif, structure=np.ones((3, 3), dtype=int))

    nodes: list[GraphNode] = []
    node_of_pixel: dict[tuple[int, int], int] = {}
    cluster_node: dict[int, int] = {}

    ys, xs = np.nonzero(is_node)
    order = np.lexsort((xs, ys))  # row-major scan
    for idx in order:
        y, x = int(ys[idx]), int(xs[idx])
        lbl = int(cluster_labels[y, x])
        if lbl > 0:
            if lbl not in cluster_node:
                cys, cxs = np.nonzero(cluster_labels == lbl)
                cx, cy = float(cxs.mean()), float(cys.mean())
                d2 = (cxs - cx) ** 2 + (cys - cy) ** 2
                best = np.lexsort((cxs, cys, d2))[0]  # nearest to centroid, row-major ties
                members = tuple(
                    (int(px), int(py))
                    for py, px in sorted(zip(cys.tolist(), cxs.tolist()))
                )
                cluster_node[lbl] = len(nodes)
                nodes.append(
                    GraphNode(int(cxs[best]), int(cys[best]), NodeKind.BIFURCATION, members)
                )
            node_of_pixel[(x, y)] = cluster_node[lbl]
        else:
            kind = NodeKind.ENDPOINT if degree[y, x] == 1 else NodeKind.ISOLATED
            node_of_pixel[(x, y)] = len(nodes)
            nodes.append(GraphNode(x, y, kind, ((x, y),)))

    def neighbors(x: int, y: int):
        for dx, dy in _NEIGHBOR_ORDER:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and fg[ny, nx]:
                yield nx, ny

    edges: list[VesselEdge] = []
    visited = np.zeros_like(fg)  # chain-interior pixels already claimed
    direct_seen: set[frozenset[tuple[int, int]]] = set()

    node_pixels_scan = [(int(ys[i]), int(xs[i])) for i in order]
    for y0, x0 in node_pixels_scan:
        a = (x0, y0)
        for nb in neighbors(x0, y0):
            if is_node[nb[1], nb[0]]:
                if node_of_pixel[nb] == node_of_pixel[a]:
                    continue  # intra-cluster adjacency
                key = frozenset((a, nb))
                if key in direct_seen:
                    continue
                direct_seen.add(key)
                edges.append(
                    VesselEdge(_orient([a, nb]), node_of_pixel[a], node_of_pixel[nb])
                )
                continue
            if visited[nb[1], nb[0]]:
                continue
            chain = [a, nb]
            visited[nb[1], nb[0]] = True
            prev, cur = a, nb
            while True:
                nxt = None
                for cand in neighbors(cur[0], cur[1]):
                    if cand != prev:
                        nxt = cand
                        break
                if nxt is None:
                    # open-ended chain; cannot happen on a valid skeleton
                    raise AssertionError(f"chain from {a} dead-ends at {cur}")
                if is_node[nxt[1], nxt[0]]:
                    if nxt == a:
                        # self-loop back to the starting pixel: closed edge
                        edges.append(
                            VesselEdge(tuple(chain), node_of_pixel[a], node_of_pixel[a], closed=True)
                        )
                    else:
                        chain.append(nxt)
                        edges.append(
                            VesselEdge(_orient(chain), node_of_pixel[a], node_of_pixel[nxt])
                        )
                    break
                chain.append(nxt)
                visited[nxt[1], nxt[0]] = True
                prev, cur = cur, nxt

    # pure cycles: leftover degree-2 pixels never reached from any node
    leftover = fg & (degree == 2) & ~visited
    if leftover.any():
        cyc_labels, n_cyc = ndimage.label(leftover, structure=np.ones((3, 3), dtype=int))
        for lbl in range(1, n_cyc + 1):
            cys, cxs = np.nonzero(cyc_labels == lbl)
            first = np.lexsort((cxs, cys))[0]
            anchor = (int(cxs[first]), int(cys[first]))
            node_id = len(nodes)
            nodes.append(GraphNode(anchor[0], anchor[1], NodeKind.CYCLE, (anchor,)))
            chain = [anchor]
            prev, cur = None, anchor
            while True:
                nxt = None
                for cand in neighbors(cur[0], cur[1]):
                    if cand != prev:
                        nxt = cand
                        break
                if nxt == anchor:
                    break
                chain.append(nxt)
                prev, cur = cur, nxt
            edges.append(VesselEdge(tuple(chain), node_id, node_id, closed=True))

    return VesselGraph(tuple(nodes), tuple(edges), width=w, height=h)


def curve_length(edge: VesselEdge) -> float:
    """Total curve length: sum of Euclidean steps along the pixel chain.

    Each 8-connected step contributes 1 or sqrt(2); closed edges include the
    step back from the last pixel to the first.
    """
    if edge.pixel_count < 2:
        raise ValueError("curve length needs at least 2 pixels")
    pts = np.asarray(edge.pixels, dtype=np.float64)
    diffs = np.diff(pts, axis=0)
    length = float(np.sqrt((diffs**2).sum(axis=1)).sum())
    if edge.closed:
        length += float(np.linalg.norm(pts[-1] - pts[0]))
    return length


def chord_length(edge: VesselEdge) -> float:
    """Straight-line distance between the first and last chain pixel.

    Zero for closed edges (the chain returns to its start).
    """
    if edge.closed:
        return 0.0
    p0, p1 = edge.pixels[0], edge.pixels[-1]
    return math.hypot(p1[0] - p0[0], p1[1] - p0[1])


def tortuosity(edge: VesselEdge) -> tuple[float, float]:
    """Arc-chord tortuosity and its excess over 1.

    Raises for degenerate edges (zero chord); those are excluded from the
    tortuosity distribution upstream.
    """
    c = chord_length(edge)
    if c == 0.0:
        raise ValueError("degenerate edge: zero chord length")
    t = curve_length(edge) / c
    return t, excess_tortuosity(t)


def segment_stats(edge: VesselEdge) -> SegmentStats:
    """Geometry record for one edge; degenerate edges get NaN tortuosity."""
    length = curve_length(edge)
    c = chord_length(edge)
    if c == 0.0:
        return SegmentStats(edge.pixel_count, length, 0.0, math.nan, math.nan, degenerate=True)
    t = length / c
    return SegmentStats(edge.pixel_count, length, c, t, excess_tortuosity(t))


def graph_stats(graph: VesselGraph) -> list[SegmentStats]:
    return [segment_stats(e) for e in graph.edges]


def with_weights(
    stats: list[SegmentStats], weights: dict[int, float]
) -> list[SegmentStats]:
    """Copy of ``stats`` with weights filled in for the selected edge indices."""
    return [
        replace(s, weight=weights.get(i, 0.0)) for i, s in enumerate(stats)
    ]


def graph_to_json(graph: VesselGraph, stats: list[SegmentStats] | None = None) -> str:
    """Versioned JSON dump of nodes, edges, and per-edge statistics."""
    if stats is None:
        stats = graph_stats(graph)
    if len(stats) != len(graph.edges):
        raise ValueError("stats/edges length mismatch")

    def _num(v: float):
        return None if math.isnan(v) else v

    payload = {
        "schema_version": GRAPH_SCHEMA_VERSION,
        "width": graph.width,
        "height": graph.height,
        "nodes": [{"x": n.x, "y": n.y, "kind": n.kind.value} for n in graph.nodes],
        "edges": [
            {
                "pixels": [[x, y] for x, y in e.pixels],
                "closed": e.closed,
                "stats": {
                    "N": s.pixel_count,
                    "L": s.curve_length,
                    "C": s.chord_length,
                    "T": _num(s.tortuosity),
                    "T_excess": _num(s.excess_tortuosity),
                    "w": s.weight,
                },
            }
            for e, s in zip(graph.edges, stats)
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True)
