"""Constant-speed random-walk mobility on the street grid.

Walkers (vehicles or event centers) move along edge centerlines at fixed
speed.  At an intersection the next street is drawn uniformly from the
incident edges excluding the one just travelled; a dead end forces a U-turn.
Residual distance within a step carries across the vertex exactly, so arc
displacement per step is always speed * dt.

The vectorized Fleet draws its turns from a counter-based stream keyed by
(salt, walker, crossing index) instead of a shared generator: every edge has
the same length, so crossing times depend only on arc distance, and binding
the k-th turn of each walker to a fixed random value lets the engine advance
a fleet across long idle stretches in one jump and resolve the pending
crossings in vectorized batches without changing any trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import GraphPose, StreetGraph, draw_uniform_arc

VEHICLE = "vehicle"
EVENT_CENTER = "event-center"

_MIX_C1 = np.uint64(0x9E3779B97F4A7C15)
_MIX_C2 = np.uint64(0xBF58476D1CE4E5B9)
_INV_2_53 = 1.0 / (1 << 53)


@dataclass(frozen=True)
class Walker:
    id: int
    pose: GraphPose
    speed: float
    kind: str = VEHICLE


def spawn_uniform(
    graph: StreetGraph, count: int, speed: float, rng: np.random.Generator, kind: str = VEHICLE
) -> list[Walker]:
    """Spawn walkers uniformly by arc length with uniform initial direction."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    edge_ids, offsets, directions = _draw_uniform_poses(graph, count, rng)
    return [
        Walker(i, GraphPose(int(edge_ids[i]), float(offsets[i]), int(directions[i])), speed, kind)
        for i in range(count)
    ]


def _draw_uniform_poses(graph: StreetGraph, count: int, rng: np.random.Generator):
    edge_ids, offsets = draw_uniform_arc(graph, count, rng)
    directions = (rng.integers(0, 2, size=count) * 2 - 1).astype(np.int8)
    return edge_ids, offsets, directions


def _pick_exit(graph: StreetGraph, edge: int, end: int, rng: np.random.Generator):
    """Draw the outgoing (edge, out_dir) when arriving at the given edge end.

    Uniform over the non-arrival incident edges (the arrival edge itself at a
    dead end), via the graph's precomputed exit tables.
    """
    k = int(rng.integers(0, graph.exit_counts[edge, end]))
    return int(graph.exit_edges[edge, end, k]), int(graph.exit_dirs[edge, end, k])


def step(walker: Walker, graph: StreetGraph, dt: float, rng: np.random.Generator) -> Walker:
    """Advance a walker by speed * dt along its path, turning at vertices."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    edge = walker.pose.edge_id
    direction = walker.pose.direction
    offset = walker.pose.offset + direction * walker.speed * dt
    length = graph.edge_length
    while offset < 0.0 or offset > length:
        if direction > 0:
            end = 1
            residual = offset - length
        else:
            end = 0
            residual = -offset
        edge, out_dir = _pick_exit(graph, edge, end, rng)
        direction = out_dir
        offset = residual if out_dir > 0 else length - residual
    return replace(walker, pose=GraphPose(edge, offset, direction))


def heading(walker: Walker, graph: StreetGraph) -> float:
    """Travel direction in world frame; one of {0, pi/2, pi, 3pi/2} on a grid."""
    return graph.edge_angle(walker.pose.edge_id, walker.pose.direction)


def _mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer; uint64 in, well-mixed uint64 out."""
    z = x.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _MIX_C2
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


class Fleet:
    """Vectorized walker population with order-independent turn randomness.

    The turn taken at the k-th vertex crossing of walker i is a pure function
    of (turn_salt, i, k), so trajectories do not depend on how stepping is
    batched: advance() may cover many steps at once and normalize() resolves
    all pending crossings afterwards.
    """

    def __init__(self, graph: StreetGraph, edge_ids, offsets, directions, speed: float,
                 turn_salt: int, kind: str = VEHICLE):
        self.graph = graph
        self.edge_ids = np.asarray(edge_ids, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.float64)
        self.directions = np.asarray(directions, dtype=np.int8).astype(np.int64)
        self.speed = float(speed)
        self.turn_salt = np.uint64(turn_salt % (1 << 64))
        self.kind = kind
        self._crossings = np.zeros(len(self.edge_ids), dtype=np.uint64)
        # Cached world positions and unit travel vectors, advanced in lockstep
        # with the offsets and recomputed exactly whenever an edge changes.
        self._unit = np.zeros((len(self.edge_ids), 2))
        self._pos = np.zeros((len(self.edge_ids), 2))
        self._refresh_cache(np.arange(len(self.edge_ids)))

    def _refresh_cache(self, idx: np.ndarray) -> None:
        graph = self.graph
        edges = self.edge_ids[idx]
        along_y = graph.edge_axis[edges] == 1
        self._unit[idx, 0] = np.where(along_y, 0.0, 1.0)
        self._unit[idx, 1] = np.where(along_y, 1.0, 0.0)
        self._pos[idx] = (graph.vertices[graph.edge_v0[edges]]
                          + self._unit[idx] * self.offsets[idx, None])

    @classmethod
    def spawn_uniform(cls, graph: StreetGraph, count: int, speed: float,
                      rng: np.random.Generator, kind: str = VEHICLE) -> "Fleet":
        if count < 0:
            raise ValueError(f"count must be non-negative, got {count}")
        edge_ids, offsets, directions = _draw_uniform_poses(graph, count, rng)
        salt = int(rng.integers(0, 1 << 63))
        return cls(graph, edge_ids, offsets, directions, speed, salt, kind)

    def __len__(self) -> int:
        return len(self.edge_ids)

    def positions(self) -> np.ndarray:
        """Current world positions, shape (N, 2); treat as read-only."""
        return self._pos

    def headings(self) -> np.ndarray:
        """World-frame travel angles in [0, 2*pi)."""
        base = self.graph.edge_axis[self.edge_ids] * (np.pi / 2)
        return base + (self.directions < 0) * np.pi

    def walker(self, i: int) -> Walker:
        pose = GraphPose(int(self.edge_ids[i]), float(self.offsets[i]), int(self.directions[i]))
        return Walker(i, pose, self.speed, self.kind)

    def advance(self, dt: float) -> None:
        """Accumulate travel distance; offsets may leave [0, edge length].

        Cached positions extrapolate along the current edge axis; walkers with
        pending crossings hold stale positions until normalize() settles them.
        """
        d = self.speed * dt
        self.offsets += self.directions * d
        self._pos += self._unit * (self.directions * d)[:, None]

    def _turn_choices(self, walker_idx: np.ndarray, n_options: np.ndarray) -> np.ndarray:
        key = (self.turn_salt
               + walker_idx.astype(np.uint64) * _MIX_C1
               + self._crossings[walker_idx] * _MIX_C2)
        self._crossings[walker_idx] += np.uint64(1)
        r = (_mix64(key) >> np.uint64(11)) * _INV_2_53
        return (r * n_options).astype(np.int64)

    def normalize(self, idx: np.ndarray | None = None) -> None:
        """Resolve pending vertex crossings, one edge traversal at a time.

        With idx given, only that subset is settled; turns are bound to each
        walker's own crossing counter, so deferring the rest never changes any
        trajectory.
        """
        graph = self.graph
        length = graph.edge_length
        offsets = self.offsets
        moved = None
        while True:
            if idx is None:
                pending = np.nonzero((offsets < 0.0) | (offsets > length))[0]
            else:
                sub = offsets[idx]
                pending = idx[(sub < 0.0) | (sub > length)]
            if pending.size == 0:
                break
            moved = pending if moved is None else moved
            over = offsets[pending] > length
            ends = over.astype(np.int64)
            residual = np.where(over, offsets[pending] - length, -offsets[pending])
            edges = self.edge_ids[pending]
            k = self._turn_choices(pending, graph.exit_counts[edges, ends])
            out_dir = graph.exit_dirs[edges, ends, k]
            self.edge_ids[pending] = graph.exit_edges[edges, ends, k]
            self.directions[pending] = out_dir
            offsets[pending] = np.where(out_dir > 0, residual, length - residual)
        if moved is not None:
            self._refresh_cache(moved)

    def step_all(self, dt: float) -> None:
        """Advance every walker by speed * dt and settle crossings."""
        self.advance(dt)
        self.normalize()
