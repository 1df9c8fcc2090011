"""Event categories, lifecycle, and footprint discretization.

An event occupies ceil(area) one-square-meter cells laid out in a fixed
square-spiral pattern around its center; the pattern translates rigidly as
the center walks the grid, and cells falling outside the street corridors
are clipped (building interiors cannot host event area).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import StreetGraph
from .mobility import EVENT_CENTER, Walker, spawn_uniform

CELL_SIZE_M = 1.0


@dataclass(frozen=True)
class EventCategory:
    name: str
    duration_s: float
    area_m2: float
    speed_mps: float


EVENT_CATEGORIES: dict[str, EventCategory] = {
    c.name: c
    for c in (
        EventCategory("explosion", 2.0, 2.0, 0.0),
        EventCategory("picket", 600.0, 100.0, 1.0),
        EventCategory("robbery", 10.0, 1.0, 5.0),
        EventCategory("vehicle", 1800.0, 8.0, 15.0),
    )
}


def spiral_offsets(n_cells: int) -> np.ndarray:
    """First n cells of the unit square spiral (right, up, left-left, ...).

    The first k*k cells always tile a k-by-k block, so e.g. 100 cells form a
    10x10 square around the origin.  Returned as an (n, 2) integer array.
    """
    if n_cells < 1:
        raise ValueError(f"need at least one cell, got {n_cells}")
    out = np.zeros((n_cells, 2), dtype=np.int64)
    x = y = 0
    moves = ((1, 0), (0, 1), (-1, 0), (0, -1))
    direction = 0
    arm = 1
    i = 1
    while i < n_cells:
        for _ in range(2):
            dx, dy = moves[direction]
            for _ in range(arm):
                x += dx
                y += dy
                out[i] = (x, y)
                i += 1
                if i == n_cells:
                    return out
            direction = (direction + 1) % 4
        arm += 1
    return out


@dataclass
class Event:
    """One event instance: category, timing, walking center, cell pattern."""

    category: EventCategory
    spawn_time: float
    center: Walker
    cell_offsets: np.ndarray  # (n_cells, 2) meters, spiral order

    @property
    def n_cells(self) -> int:
        return len(self.cell_offsets)

    @property
    def end_time(self) -> float:
        return self.spawn_time + self.category.duration_s

    def active(self, t: float) -> bool:
        return self.spawn_time <= t <= self.end_time


def spawn_event(category: EventCategory, graph: StreetGraph, round_length: float,
                rng: np.random.Generator) -> Event:
    """Spawn one event with street-uniform center and an interior time window.

    The spawn time is drawn so the whole event fits inside the round.
    """
    if category.duration_s > round_length:
        raise ValueError(
            f"event duration {category.duration_s} s exceeds round length {round_length} s"
        )
    center = spawn_uniform(graph, 1, category.speed_mps, rng, kind=EVENT_CENTER)[0]
    spawn_time = float(rng.uniform(0.0, round_length - category.duration_s))
    n_cells = math.ceil(category.area_m2 / (CELL_SIZE_M * CELL_SIZE_M))
    offsets = spiral_offsets(n_cells).astype(np.float64) * CELL_SIZE_M
    return Event(category, spawn_time, center, offsets)


def footprint_cells_indexed(event: Event, graph: StreetGraph, t: float):
    """Clipped footprint at time t: (cell centers (m, 2), spiral indices (m,)).

    Cells are centered on the event center's current position plus the fixed
    spiral offsets; centers outside the corridor region are dropped.
    """
    if not event.active(t):
        raise ValueError(f"t={t} outside the event's active interval")
    centers = graph.pose_position(event.center.pose)[None, :] + event.cell_offsets
    mask = graph.contains_points(centers)
    return centers[mask], np.nonzero(mask)[0]


def footprint_cells(event: Event, graph: StreetGraph, t: float) -> np.ndarray:
    """Clipped footprint cell centers at time t, in spiral order."""
    return footprint_cells_indexed(event, graph, t)[0]
