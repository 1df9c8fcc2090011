"""Experiment configuration: defaults, validation, JSON parsing.

Config files are flat JSON documents with snake_case keys; unknown keys are
rejected and every validation failure names the offending key.  A run
manifest produced by the results writer is itself a valid config file, so a
sweep can be reproduced from its manifest alone.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .events import EVENT_CATEGORIES
from .metrics import CELLS_ANY, CELLS_FIXED, WINDOW_CONTIGUOUS, WINDOW_CUMULATIVE
from .sensing import CameraSpec


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass
class ExperimentConfig:
    """One runnable cell: a single (category, penetration, density) setting."""

    nx: int = 11
    ny: int = 11
    block_length: float = 100.0
    corridor_width: float = 20.0
    vehicle_density: float = 1967.0       # vehicles per km^2 at full penetration
    vehicle_speed: float = 15.0           # m/s
    vehicle_camera_range: float = 30.0    # m
    vehicle_camera_fov: float = 120.0     # total opening angle, degrees
    stationary_camera_range: float = 50.0
    stationary_camera_fov: float = 120.0
    stationary_density: float = 0.0       # cameras per km^2
    penetration: float = 0.0              # participating share of vehicles
    category: str = "explosion"
    step: float = 0.05                    # s
    round_length: float = 3600.0          # s
    rounds: int = 1000
    seed: int = 1
    occlusion: bool = True
    detection_window: str = WINDOW_CONTIGUOUS
    detection_cells: str = CELLS_FIXED
    point_spacing: float = 50.0           # m between observation points
    workers: int | None = None            # None: all cores

    def vehicle_spec(self) -> CameraSpec:
        return CameraSpec(self.vehicle_camera_range, self.vehicle_camera_fov / 2.0)

    def stationary_spec(self) -> CameraSpec:
        return CameraSpec(self.stationary_camera_range, self.stationary_camera_fov / 2.0)

    def system_label(self) -> str:
        if self.penetration > 0 and self.stationary_density > 0:
            return "combined"
        if self.penetration > 0:
            return "mobile"
        if self.stationary_density > 0:
            return "stationary"
        return "none"

    def cell_x(self) -> float:
        """Sweep coordinate: penetration for mobile cells, density otherwise."""
        if self.penetration > 0 or self.stationary_density == 0:
            return float(self.penetration)
        return float(self.stationary_density)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        _check(isinstance(self.nx, int) and self.nx >= 2, "nx", "needs an integer >= 2")
        _check(isinstance(self.ny, int) and self.ny >= 2, "ny", "needs an integer >= 2")
        _check(_is_number(self.block_length) and self.block_length > 0,
               "block_length", "must be a positive number")
        _check(_is_number(self.corridor_width)
               and 0 < self.corridor_width < self.block_length,
               "corridor_width", "must lie in (0, block_length)")
        _check(_is_number(self.vehicle_density) and self.vehicle_density >= 0,
               "vehicle_density", "must be non-negative")
        _check(_is_number(self.vehicle_speed) and self.vehicle_speed >= 0,
               "vehicle_speed", "must be non-negative")
        _check(_is_number(self.vehicle_camera_range) and self.vehicle_camera_range > 0,
               "vehicle_camera_range", "must be positive")
        _check(_is_number(self.stationary_camera_range) and self.stationary_camera_range > 0,
               "stationary_camera_range", "must be positive")
        for key in ("vehicle_camera_fov", "stationary_camera_fov"):
            fov = getattr(self, key)
            _check(_is_number(fov) and 0 < fov <= 360, key, "must lie in (0, 360] degrees")
        _check(_is_number(self.stationary_density) and self.stationary_density >= 0,
               "stationary_density", "must be non-negative")
        _check(_is_number(self.penetration) and 0 <= self.penetration <= 1,
               "penetration", "must lie in [0, 1]")
        _check(self.category in EVENT_CATEGORIES, "category",
               f"must be one of {sorted(EVENT_CATEGORIES)}")
        _check(_is_number(self.step) and self.step > 0, "step", "must be positive")
        _check(_is_number(self.round_length) and self.round_length > 0,
               "round_length", "must be positive")
        duration = EVENT_CATEGORIES[self.category].duration_s
        _check(self.round_length >= duration, "round_length",
               f"must cover the {self.category} duration of {duration} s")
        _check(isinstance(self.rounds, int) and self.rounds >= 1,
               "rounds", "needs an integer >= 1")
        _check(isinstance(self.seed, int) and not isinstance(self.seed, bool),
               "seed", "needs an integer")
        _check(isinstance(self.occlusion, bool), "occlusion", "needs true or false")
        _check(self.detection_window in (WINDOW_CONTIGUOUS, WINDOW_CUMULATIVE),
               "detection_window",
               f"must be '{WINDOW_CONTIGUOUS}' or '{WINDOW_CUMULATIVE}'")
        _check(self.detection_cells in (CELLS_FIXED, CELLS_ANY),
               "detection_cells", f"must be '{CELLS_FIXED}' or '{CELLS_ANY}'")
        _check(_is_number(self.point_spacing) and self.point_spacing > 0,
               "point_spacing", "must be positive")
        _check(self.workers is None
               or (isinstance(self.workers, int) and self.workers >= 1),
               "workers", "needs null or an integer >= 1")
        # Walkers may move at most one meter per timestamp.
        budget = max(self.vehicle_speed, EVENT_CATEGORIES[self.category].speed_mps)
        _check(budget * self.step <= 1.0 + 1e-12, "step",
               f"speed x step is {budget * self.step:.3f} m; the limit is 1 m")


@dataclass
class SweepSpec:
    """Axes of a full experiment: penetrations, densities, categories."""

    penetrations: list[float] = field(
        default_factory=lambda: [round(0.1 * k, 1) for k in range(1, 11)])
    stationary_densities: list[float] = field(
        default_factory=lambda: [300.0, 166.0, 123.0])
    categories: list[str] = field(
        default_factory=lambda: ["explosion", "picket", "robbery", "vehicle"])
    fragmentation_penetration: float = 0.3

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        _check(isinstance(self.penetrations, list) and len(self.penetrations) > 0,
               "penetrations", "needs a non-empty list")
        for p in self.penetrations:
            _check(_is_number(p) and 0 <= p <= 1, "penetrations",
                   f"contains {p!r}; every value must lie in [0, 1]")
        _check(isinstance(self.stationary_densities, list)
               and len(self.stationary_densities) > 0,
               "stationary_densities", "needs a non-empty list")
        for d in self.stationary_densities:
            _check(_is_number(d) and d >= 0, "stationary_densities",
                   f"contains {d!r}; every value must be non-negative")
        _check(isinstance(self.categories, list) and len(self.categories) > 0,
               "categories", "needs a non-empty list")
        for c in self.categories:
            _check(c in EVENT_CATEGORIES, "categories",
                   f"contains {c!r}; valid names: {sorted(EVENT_CATEGORIES)}")
        _check(_is_number(self.fragmentation_penetration)
               and 0 <= self.fragmentation_penetration <= 1,
               "fragmentation_penetration", "must lie in [0, 1]")


_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}
_SWEEP_KEYS = {f.name for f in fields(SweepSpec)}


def config_from_dict(data: dict) -> tuple[ExperimentConfig, SweepSpec]:
    """Build and validate (config, sweep) from a flat dict; rejects unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = sorted(set(data) - _CONFIG_KEYS - _SWEEP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key: {unknown[0]!r}")
    config = ExperimentConfig(**{k: v for k, v in data.items() if k in _CONFIG_KEYS})
    sweep = SweepSpec(**{k: v for k, v in data.items() if k in _SWEEP_KEYS})
    config.validate()
    sweep.validate()
    return config, sweep


def parse_config(path) -> tuple[ExperimentConfig, SweepSpec]:
    """Load a JSON config file; omitted keys fall back to the built-in defaults."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"config key '{key}': {message}")
