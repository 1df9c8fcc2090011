"""Camera model: range-limited angular sector with optional occlusion.

A camera sees a target when the target is within range, within the half-angle
of the boresight (both boundaries inclusive), and, with occlusion enabled,
when the sight line stays inside the street corridors.  A target exactly at
the camera position is always visible.  The scalar test and the batched mask
share one kernel so accelerated queries match the per-pair oracle bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import StreetGraph, draw_uniform_arc, line_of_sight_many

STATIONARY = "stationary"


@dataclass(frozen=True)
class CameraSpec:
    range_m: float
    fov_half_angle_deg: float

    def __post_init__(self):
        if self.range_m <= 0:
            raise ValueError(f"camera range must be positive, got {self.range_m}")
        if not 0 < self.fov_half_angle_deg <= 180:
            raise ValueError(
                f"fov half-angle must lie in (0, 180] degrees, got {self.fov_half_angle_deg}"
            )

    @property
    def fov_half_angle_rad(self) -> float:
        return math.radians(self.fov_half_angle_deg)


@dataclass
class CameraInstance:
    """A mounted camera: either tracking a vehicle or fixed for the round."""

    id: int
    spec: CameraSpec
    mount: int | str  # vehicle id, or the literal "stationary"
    position: np.ndarray = field(default_factory=lambda: np.zeros(2))
    heading: float = 0.0


def deploy_stationary(graph: StreetGraph, density: float,
                      rng: np.random.Generator, spec: CameraSpec | None = None
                      ) -> list[CameraInstance]:
    """Place round(density * area_km2) cameras uniformly along the streets.

    Each camera faces one of the two directions of its street axis, drawn
    uniformly; street-surveillance cameras look down the road they sit on.
    """
    if density < 0:
        raise ValueError(f"density must be non-negative, got {density}")
    if spec is None:
        spec = CameraSpec(50.0, 60.0)
    count = int(round(density * graph.area_km2))
    edge_ids, offsets = draw_uniform_arc(graph, count, rng)
    facing = rng.integers(0, 2, size=count) * 2 - 1
    positions = graph.positions_on_edges(edge_ids, offsets)
    headings = graph.edge_axis[edge_ids] * (np.pi / 2) + (facing < 0) * np.pi
    return [
        CameraInstance(i, spec, STATIONARY, positions[i], float(headings[i]))
        for i in range(count)
    ]


def visibility_mask(positions: np.ndarray, headings: np.ndarray, spec: CameraSpec,
                    targets: np.ndarray, graph: StreetGraph, occlusion: bool = True
                    ) -> np.ndarray:
    """Boolean (cameras, targets) visibility matrix for one camera spec.

    positions is (C, 2), headings (C,), targets (T, 2).
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    headings = np.asarray(headings, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1, 2)
    dx = targets[None, :, 0] - positions[:, None, 0]
    dy = targets[None, :, 1] - positions[:, None, 1]
    d2 = dx * dx + dy * dy
    ok = d2 <= spec.range_m * spec.range_m
    angles = np.arctan2(dy, dx)
    off_axis = np.mod(angles - headings[:, None] + np.pi, 2 * np.pi) - np.pi
    ok &= (np.abs(off_axis) <= spec.fov_half_angle_rad) | (d2 == 0.0)
    if occlusion and ok.any():
        ci, ti = np.nonzero(ok)
        ok[ci, ti] = line_of_sight_many(graph, positions[ci], targets[ti])
    return ok


def visible(camera: CameraInstance, target, graph: StreetGraph, occlusion: bool = True) -> bool:
    """Scalar visibility test; delegates to the batched kernel."""
    target = np.asarray(target, dtype=np.float64)
    mask = visibility_mask(
        camera.position[None, :], np.array([camera.heading]), camera.spec,
        target[None, :], graph, occlusion,
    )
    return bool(mask[0, 0])


def observed_set(cameras: list[CameraInstance], targets, graph: StreetGraph,
                 occlusion: bool = True) -> set[tuple[int, int]]:
    """All (camera id, target index) pairs currently visible.

    Cameras are grouped by spec and run through the batched kernel, which is
    equivalent to testing every pair with `visible`.
    """
    targets = np.asarray(targets, dtype=np.float64).reshape(-1, 2)
    pairs: set[tuple[int, int]] = set()
    if not cameras or len(targets) == 0:
        return pairs
    by_spec: dict[CameraSpec, list[CameraInstance]] = {}
    for cam in cameras:
        by_spec.setdefault(cam.spec, []).append(cam)
    for spec, group in by_spec.items():
        positions = np.array([c.position for c in group], dtype=np.float64)
        headings = np.array([c.heading for c in group], dtype=np.float64)
        mask = visibility_mask(positions, headings, spec, targets, graph, occlusion)
        for row, col in zip(*np.nonzero(mask)):
            pairs.add((group[row].id, int(col)))
    return pairs
