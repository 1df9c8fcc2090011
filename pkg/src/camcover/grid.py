"""Synthetic Manhattan-style street grid.

The city is a regular nx-by-ny lattice of intersections joined by straight
streets of equal length.  Each street carries a rectangular corridor of
configurable width around its centerline; the union of the corridors is the
drivable/visible region and its complement stands in for building blocks.
Sight lines are tested against that corridor region, and fixed observation
points are laid out along the centerlines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Sight-line segments are sampled at most this far apart (meters).
LOS_SAMPLE_STEP = 0.5


@dataclass(frozen=True)
class GraphPose:
    """Position on the graph: meters from the edge's first vertex.

    direction is +1 when travel increases the offset (toward the edge's
    second vertex) and -1 otherwise.
    """

    edge_id: int
    offset: float
    direction: int


@dataclass(frozen=True)
class ObservationPoint:
    """Fixed point on a street centerline representing one surveilled zone."""

    id: int
    position: tuple[float, float]


class StreetGraph:
    """Planar rectangular street grid with corridor geometry.

    Immutable after construction; safe to share read-only across workers.
    Vertices are indexed row-major (id = row * n_cols + col).  Horizontal
    edges come first in edge order, then vertical ones; every edge points
    from its lower-left vertex toward +x or +y.
    """

    def __init__(self, n_cols: int, n_rows: int, block_length: float, corridor_width: float):
        if n_cols < 2 or n_rows < 2:
            raise ValueError(f"grid needs at least 2x2 intersections, got {n_cols}x{n_rows}")
        if block_length <= 0:
            raise ValueError(f"block_length must be positive, got {block_length}")
        if not 0 < corridor_width < block_length:
            raise ValueError(
                f"corridor_width must lie in (0, block_length), got {corridor_width}"
            )

        self.n_cols = n_cols
        self.n_rows = n_rows
        self.block_length = float(block_length)
        self.corridor_width = float(corridor_width)
        self.width = (n_cols - 1) * self.block_length
        self.height = (n_rows - 1) * self.block_length

        cols = np.arange(n_cols) * self.block_length
        rows = np.arange(n_rows) * self.block_length
        gx, gy = np.meshgrid(cols, rows)
        self.vertices = np.column_stack([gx.ravel(), gy.ravel()])

        # Horizontal edges (axis 0), then vertical edges (axis 1).
        h_start = (np.arange(n_rows)[:, None] * n_cols + np.arange(n_cols - 1)[None, :]).ravel()
        v_start = (np.arange(n_rows - 1)[:, None] * n_cols + np.arange(n_cols)[None, :]).ravel()
        self.edge_v0 = np.concatenate([h_start, v_start]).astype(np.int64)
        self.edge_v1 = np.concatenate([h_start + 1, v_start + n_cols]).astype(np.int64)
        self.edge_axis = np.concatenate(
            [np.zeros(len(h_start), dtype=np.int8), np.ones(len(v_start), dtype=np.int8)]
        )
        self.n_edges = len(self.edge_v0)
        self.n_vertices = n_cols * n_rows

        # Per-vertex adjacency, padded to 4 slots, edge ids ascending.
        self.adj_edges = np.full((self.n_vertices, 4), -1, dtype=np.int64)
        self.adj_out_dir = np.zeros((self.n_vertices, 4), dtype=np.int8)
        self.degree = np.zeros(self.n_vertices, dtype=np.int8)
        for e in range(self.n_edges):
            for v, out_dir in ((self.edge_v0[e], 1), (self.edge_v1[e], -1)):
                k = self.degree[v]
                self.adj_edges[v, k] = e
                self.adj_out_dir[v, k] = out_dir
                self.degree[v] = k + 1

        # Exit tables per directed edge end: the sorted non-arrival incident
        # edges of the vertex reached (the arrival edge itself at dead ends).
        # exit_*(e, 0, k) applies when arriving at the edge's first vertex.
        self.exit_edges = np.full((self.n_edges, 2, 3), -1, dtype=np.int64)
        self.exit_dirs = np.zeros((self.n_edges, 2, 3), dtype=np.int64)
        self.exit_counts = np.zeros((self.n_edges, 2), dtype=np.int64)
        for e in range(self.n_edges):
            for end, v in ((0, self.edge_v0[e]), (1, self.edge_v1[e])):
                deg = self.degree[v]
                exits = [
                    (int(self.adj_edges[v, j]), int(self.adj_out_dir[v, j]))
                    for j in range(deg)
                    if self.adj_edges[v, j] != e
                ]
                if not exits:
                    j = int(np.argmax(self.adj_edges[v, :deg] == e))
                    exits = [(e, int(self.adj_out_dir[v, j]))]
                self.exit_counts[e, end] = len(exits)
                for k, (edge_id, out_dir) in enumerate(exits):
                    self.exit_edges[e, end, k] = edge_id
                    self.exit_dirs[e, end, k] = out_dir

        half = self.corridor_width / 2.0
        self.bounds = (-half, -half, self.width + half, self.height + half)

    # -- derived scalars ---------------------------------------------------

    @property
    def edge_length(self) -> float:
        return self.block_length

    @property
    def total_street_length(self) -> float:
        return self.n_edges * self.block_length

    @property
    def area_km2(self) -> float:
        return self.width * self.height / 1e6

    # -- geometry ----------------------------------------------------------

    def positions_on_edges(self, edge_ids: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        """Map (edge_id, offset) pairs to 2D positions, shape (N, 2)."""
        out = self.vertices[self.edge_v0[edge_ids]].copy()
        along_y = self.edge_axis[edge_ids] == 1
        out[:, 0] += np.where(along_y, 0.0, offsets)
        out[:, 1] += np.where(along_y, offsets, 0.0)
        return out

    def pose_position(self, pose: GraphPose) -> np.ndarray:
        base = self.vertices[self.edge_v0[pose.edge_id]].copy()
        base[self.edge_axis[pose.edge_id]] += pose.offset
        return base

    def edge_angle(self, edge_id: int, direction: int) -> float:
        """World-frame travel angle along an edge, in [0, 2*pi)."""
        if self.edge_axis[edge_id] == 0:
            return 0.0 if direction > 0 else math.pi
        return math.pi / 2 if direction > 0 else 3 * math.pi / 2

    def contains_xy(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Corridor membership for coordinate arrays; boundaries count as inside."""
        half = self.corridor_width / 2.0
        block = self.block_length
        col = np.clip(np.rint(x / block), 0, self.n_cols - 1)
        row = np.clip(np.rint(y / block), 0, self.n_rows - 1)
        near_vertical = np.abs(x - col * block) <= half
        near_horizontal = np.abs(y - row * block) <= half
        in_x = (x >= 0.0) & (x <= self.width)
        in_y = (y >= 0.0) & (y <= self.height)
        return (near_vertical & in_y) | (near_horizontal & in_x)

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """Corridor membership for an (N, 2) array; boundaries count as inside."""
        pts = np.asarray(points, dtype=np.float64)
        return self.contains_xy(pts[:, 0], pts[:, 1])

    def contains_point(self, point) -> bool:
        return bool(self.contains_points(np.asarray(point, dtype=np.float64)[None, :])[0])


def build_grid(nx: int, ny: int, block_length: float, corridor_width: float) -> StreetGraph:
    """Build an nx-by-ny intersection grid with the given block and corridor sizes."""
    return StreetGraph(nx, ny, block_length, corridor_width)


def draw_uniform_arc(graph: StreetGraph, count: int, rng: np.random.Generator):
    """Draw count street positions uniform by arc length.

    Returns (edge_ids, offsets).  One uniform over the total street length per
    position; all edges share one length, so the split is exact.
    """
    u = rng.uniform(0.0, graph.total_street_length, size=count)
    edge_ids = np.minimum((u / graph.edge_length).astype(np.int64), graph.n_edges - 1)
    offsets = u - edge_ids * graph.edge_length
    return edge_ids, offsets


def place_observation_points(graph: StreetGraph, spacing: float) -> list[ObservationPoint]:
    """Lay observation points along every centerline at the given arc spacing.

    Each edge contributes both endpoints plus interior points at multiples of
    ``spacing``; points shared at vertices are emitted once.  Ordering follows
    (edge_id, offset) with first occurrence winning, so ids are stable.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    length = graph.edge_length
    points: list[ObservationPoint] = []
    seen_vertices: set[int] = set()
    next_id = 0
    for e in range(graph.n_edges):
        offsets = []
        k = 0
        while k * spacing < length - 1e-9:
            offsets.append(k * spacing)
            k += 1
        offsets.append(length)
        for off in offsets:
            vertex = None
            if off == 0.0:
                vertex = int(graph.edge_v0[e])
            elif off == length:
                vertex = int(graph.edge_v1[e])
            if vertex is not None:
                if vertex in seen_vertices:
                    continue
                seen_vertices.add(vertex)
            pos = graph.positions_on_edges(np.array([e]), np.array([off]))[0]
            points.append(ObservationPoint(next_id, (float(pos[0]), float(pos[1]))))
            next_id += 1
    return points


def line_of_sight_many(graph: StreetGraph, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sight test for N segments at once; a and b are (N, 2) arrays.

    A segment is clear when every sample point (spaced <= LOS_SAMPLE_STEP
    apart, endpoints included) lies inside the corridor region.  Segments
    whose endpoints both sit in one corridor strip are inside by convexity
    and skip the sampling; the outcome is identical either way.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    ax, ay = a[:, 0], a[:, 1]
    bx, by = b[:, 0], b[:, 1]
    block = graph.block_length
    half = graph.corridor_width / 2.0
    col_a = np.rint(ax / block)
    row_a = np.rint(ay / block)
    same_strip_v = (
        (col_a == np.rint(bx / block))
        & (np.abs(ax - col_a * block) <= half) & (np.abs(bx - col_a * block) <= half)
        & (ay >= 0.0) & (ay <= graph.height) & (by >= 0.0) & (by <= graph.height)
        & (col_a >= 0) & (col_a <= graph.n_cols - 1)
    )
    same_strip_h = (
        (row_a == np.rint(by / block))
        & (np.abs(ay - row_a * block) <= half) & (np.abs(by - row_a * block) <= half)
        & (ax >= 0.0) & (ax <= graph.width) & (bx >= 0.0) & (bx <= graph.width)
        & (row_a >= 0) & (row_a <= graph.n_rows - 1)
    )
    clear = same_strip_v | same_strip_h
    rest = np.nonzero(~clear)[0]
    if rest.size == 0:
        return clear
    dx = bx[rest] - ax[rest]
    dy = by[rest] - ay[rest]
    dist = np.hypot(dx, dy)
    n_pts = np.ceil(dist / LOS_SAMPLE_STEP).astype(np.int64) + 1
    steps = np.arange(int(n_pts.max()), dtype=np.float64)
    t = np.minimum(steps[None, :] / np.maximum(n_pts - 1, 1)[:, None], 1.0)
    sx = ax[rest, None] + t * dx[:, None]
    sy = ay[rest, None] + t * dy[:, None]
    inside = graph.contains_xy(sx.ravel(), sy.ravel()).reshape(t.shape)
    clear[rest] = inside.all(axis=1)
    return clear


def line_of_sight(graph: StreetGraph, a, b) -> bool:
    """True when the segment a-b stays inside the street corridors."""
    a = np.asarray(a, dtype=np.float64)[None, :]
    b = np.asarray(b, dtype=np.float64)[None, :]
    return bool(line_of_sight_many(graph, a, b)[0])
