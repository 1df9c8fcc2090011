"""Time-driven round execution, experiment sweeps, and parallel rounds.

A round advances every walker on a fixed 0.05 s clock for one simulated hour
and evaluates camera-to-footprint visibility at every sample inside the
event's lifetime.  All randomness flows from one Generator per round whose
seed derives from the master seed by a documented blake2b mix, so identical
(config, seed) pairs reproduce rounds bit for bit and rounds can run on any
number of workers in any order.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from .config import ExperimentConfig, SweepSpec
from .events import EVENT_CATEGORIES, Event, spawn_event
from .grid import ObservationPoint, StreetGraph, build_grid
from .metrics import CoverageLog, MetricsReport, aggregate, detect, fragment_count, monitor
from .mobility import Fleet, step as step_walker
from .sensing import CameraInstance, deploy_stationary, visibility_mask
from .stitching import VehicleStreamBundle


def mix_seed(*parts) -> int:
    """Derive a 64-bit seed from arbitrary parts, stable across platforms."""
    digest = hashlib.blake2b(digest_size=8)
    for part in parts:
        digest.update(repr(part).encode("utf-8"))
        digest.update(b"\x1f")
    return int.from_bytes(digest.digest(), "little")


@dataclass(frozen=True)
class RoundResult:
    """Metric inputs extracted from one simulated round."""

    detected: bool
    monitored: bool
    fragment_count: int
    coverage_seconds: float
    seed: int


@dataclass
class RoundStreams:
    """Per-round stream export feeding the stitching pipeline.

    raw_visibility maps (vehicle id, point id) to the sorted sample indices at
    which the vehicle camera saw the point; it is the ground truth the
    stitcher output is checked against.  Meant for small scenes: arrays grow
    as samples x vehicles.
    """

    times: np.ndarray
    bundles: list[VehicleStreamBundle]
    points: list[ObservationPoint]
    raw_visibility: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)


def build_scene(config: ExperimentConfig, rng: np.random.Generator):
    """Spawn the round's graph, fleet, stationary cameras, and event.

    Draw order is fixed (vehicles, stationary cameras, event) so a round seed
    pins the whole scene.
    """
    graph = build_grid(config.nx, config.ny, config.block_length, config.corridor_width)
    n_vehicles = int(round(config.vehicle_density * graph.area_km2 * config.penetration))
    fleet = Fleet.spawn_uniform(graph, n_vehicles, config.vehicle_speed, rng)
    stationary = deploy_stationary(
        graph, config.stationary_density, rng, config.stationary_spec()
    )
    event = spawn_event(EVENT_CATEGORIES[config.category], graph, config.round_length, rng)
    return graph, fleet, stationary, event


def simulate_scene(config: ExperimentConfig, graph: StreetGraph, fleet: Fleet,
                   stationary: list[CameraInstance], event: Event,
                   rng: np.random.Generator,
                   export_points: list[ObservationPoint] | None = None):
    """Step one round and log footprint coverage (plus streams when exporting).

    Returns (CoverageLog, RoundStreams | None).  Samples sit at t = i * step
    for i in 0..round_length/step; the event center holds its spawn pose at
    its first active sample and walks from the next one.
    """
    step_s = config.step
    n_steps = int(round(config.round_length / step_s))
    first = max(0, int(math.ceil(event.spawn_time / step_s - 1e-9)))
    last = min(n_steps, int(math.floor(event.end_time / step_s + 1e-9)))

    v_spec = config.vehicle_spec()
    s_spec = config.stationary_spec()
    occlusion = config.occlusion
    cell_offsets = event.cell_offsets
    footprint_radius = float(np.hypot(cell_offsets[:, 0], cell_offsets[:, 1]).max())
    v_near2 = (v_spec.range_m + footprint_radius) ** 2
    s_near2 = (s_spec.range_m + footprint_radius) ** 2
    n_vehicles = len(fleet)
    stat_pos = np.array([c.position for c in stationary], dtype=np.float64).reshape(-1, 2)
    stat_head = np.array([c.heading for c in stationary], dtype=np.float64)

    export = None
    if export_points is not None:
        export = _ExportState(n_steps, step_s, n_vehicles, export_points)

    axis = graph.edge_axis
    half_pi = np.pi / 2
    n_active = last - first + 1
    obs_samples: list[np.ndarray] = []
    obs_cameras: list[np.ndarray] = []
    obs_cells: list[np.ndarray] = []
    all_cells_idx = np.arange(event.n_cells, dtype=np.int64)
    # A footprint no wider than the corridor clips only near the grid rim.
    narrow_footprint = footprint_radius <= graph.corridor_width / 2.0

    # Candidate refresh: a camera farther out than the per-step test radius
    # plus the worst-case relative displacement over the refresh interval
    # cannot become relevant before the next full sync, so in between only
    # the candidate subset needs exact positions.
    event_speed = event.category.speed_mps
    sync_every = max(1, int(round(1.0 / step_s)))
    v_wide2 = (v_spec.range_m + footprint_radius
               + (fleet.speed + event_speed) * sync_every * step_s) ** 2
    s_wide2 = (s_spec.range_m + footprint_radius
               + event_speed * sync_every * step_s) ** 2
    cand_v = np.empty(0, dtype=np.int64)
    cand_s = np.empty(0, dtype=np.int64)
    sync_left = 0

    def full_sync() -> None:
        nonlocal cand_v, cand_s, sync_left
        fleet.normalize()
        center = graph.pose_position(event.center.pose)
        if n_vehicles:
            vpos = fleet.positions()
            dx = vpos[:, 0] - center[0]
            dy = vpos[:, 1] - center[1]
            cand_v = np.nonzero(dx * dx + dy * dy <= v_wide2)[0]
        if len(stat_pos):
            dx = stat_pos[:, 0] - center[0]
            dy = stat_pos[:, 1] - center[1]
            cand_s = np.nonzero(dx * dx + dy * dy <= s_wide2)[0]
        sync_left = sync_every

    def observe(sample: int) -> None:
        center = graph.pose_position(event.center.pose)
        cells = center[None, :] + cell_offsets
        if narrow_footprint and (
            footprint_radius <= center[0] <= graph.width - footprint_radius
            and footprint_radius <= center[1] <= graph.height - footprint_radius
        ):
            targets = cells
            target_idx = all_cells_idx
        else:
            keep = graph.contains_points(cells)
            targets = cells[keep]
            target_idx = np.nonzero(keep)[0]
        if cand_v.size:
            vpos = fleet.positions()[cand_v]
            dx = vpos[:, 0] - center[0]
            dy = vpos[:, 1] - center[1]
            hit = np.nonzero(dx * dx + dy * dy <= v_near2)[0]
            if hit.size:
                near = cand_v[hit]
                heads = (axis[fleet.edge_ids[near]] * half_pi
                         + (fleet.directions[near] < 0) * np.pi)
                mask = visibility_mask(vpos[hit], heads, v_spec, targets,
                                       graph, occlusion)
                rows, cols = np.nonzero(mask)
                if rows.size:
                    obs_samples.append(np.full(rows.size, sample, dtype=np.int64))
                    obs_cameras.append(near[rows])
                    obs_cells.append(target_idx[cols])
        if cand_s.size:
            spos = stat_pos[cand_s]
            dx = spos[:, 0] - center[0]
            dy = spos[:, 1] - center[1]
            hit = np.nonzero(dx * dx + dy * dy <= s_near2)[0]
            if hit.size:
                near = cand_s[hit]
                mask = visibility_mask(spos[hit], stat_head[near], s_spec,
                                       targets, graph, occlusion)
                rows, cols = np.nonzero(mask)
                if rows.size:
                    obs_samples.append(np.full(rows.size, sample, dtype=np.int64))
                    obs_cameras.append(near[rows] + n_vehicles)
                    obs_cells.append(target_idx[cols])

    if export is None:
        # Fleet turns are bound to (walker, crossing) counters, so the idle
        # stretches before and after the event collapse into single jumps
        # without changing any trajectory.
        if first > 0:
            fleet.advance(first * step_s)
        full_sync()
        observe(0)
        for i in range(first + 1, last + 1):
            fleet.advance(step_s)
            sync_left -= 1
            if sync_left <= 0:
                full_sync()
            else:
                fleet.normalize(cand_v)
            event.center = step_walker(event.center, graph, step_s, rng)
            observe(i - first)
        if last < n_steps:
            fleet.advance((n_steps - last) * step_s)
            fleet.normalize()
    else:
        for i in range(n_steps + 1):
            if i > 0:
                fleet.step_all(step_s)
                if first < i <= last:
                    event.center = step_walker(event.center, graph, step_s, rng)
            if first <= i <= last:
                sync_left -= 1
                if sync_left <= 0:
                    full_sync()
                observe(i - first)
            export.record(i, fleet, graph, v_spec, occlusion)

    log = CoverageLog(
        step_s, event.n_cells, n_active,
        _concat(obs_samples), _concat(obs_cameras), _concat(obs_cells),
    )
    return log, (export.finish() if export is not None else None)


def _concat(chunks: list[np.ndarray]) -> np.ndarray:
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)


class _ExportState:
    """Accumulates per-sample fleet state and raw point visibility."""

    def __init__(self, n_steps: int, step_s: float, n_vehicles: int,
                 points: list[ObservationPoint]):
        self.times = np.arange(n_steps + 1) * step_s
        self.positions = np.empty((n_steps + 1, n_vehicles, 2))
        self.headings = np.empty((n_steps + 1, n_vehicles))
        self.points = points
        self.point_coords = np.array([p.position for p in points], dtype=np.float64)
        self.point_ids = np.array([p.id for p in points])
        self._hits: list[tuple[int, np.ndarray, np.ndarray]] = []

    def record(self, i, fleet, graph, v_spec, occlusion):
        pos = fleet.positions()
        heads = fleet.headings()
        self.positions[i] = pos
        self.headings[i] = heads
        if len(pos) and len(self.point_coords):
            mask = visibility_mask(pos, heads, v_spec, self.point_coords, graph, occlusion)
            rows, cols = np.nonzero(mask)
            if rows.size:
                self._hits.append((i, rows, cols))

    def finish(self) -> RoundStreams:
        n_vehicles = self.positions.shape[1]
        frames = np.arange(len(self.times))
        bundles = [
            VehicleStreamBundle(v, self.times, self.positions[:, v, :],
                                self.headings[:, v], frames)
            for v in range(n_vehicles)
        ]
        raw: dict[tuple[int, int], list[int]] = {}
        for i, rows, cols in self._hits:
            for r, c in zip(rows, cols):
                raw.setdefault((int(r), int(self.point_ids[c])), []).append(i)
        visibility = {key: np.array(val) for key, val in sorted(raw.items())}
        return RoundStreams(self.times, bundles, self.points, visibility)


def run_round(config: ExperimentConfig, round_seed: int,
              export_points: list[ObservationPoint] | None = None):
    """Run one seeded round; returns RoundResult (plus streams when exporting)."""
    rng = np.random.default_rng(round_seed)
    graph, fleet, stationary, event = build_scene(config, rng)
    log, streams = simulate_scene(config, graph, fleet, stationary, event, rng,
                                  export_points)
    result = round_result_from_log(config, log, round_seed)
    if export_points is None:
        return result
    return result, streams


def round_result_from_log(config: ExperimentConfig, log: CoverageLog,
                          round_seed: int) -> RoundResult:
    covered = log.covered_samples()
    return RoundResult(
        detected=detect(log, config.detection_window, config.detection_cells),
        monitored=monitor(log),
        fragment_count=fragment_count(log),
        coverage_seconds=round(covered * log.step, 9),
        seed=round_seed,
    )


# -- experiment orchestration -------------------------------------------------

_POOL_CONFIGS: list[ExperimentConfig] = []


def _init_pool(configs):
    global _POOL_CONFIGS
    _POOL_CONFIGS = configs


def _pool_round(task):
    cell_idx, round_idx, seed = task
    return cell_idx, round_idx, run_round(_POOL_CONFIGS[cell_idx], seed)


def execute_cells(cells: list[tuple[tuple[str, str, float], ExperimentConfig]],
                  workers: int | None = None) -> MetricsReport:
    """Run every (key, config) cell for its configured round count.

    Round i of a cell uses seed mix_seed(cell seed, i).  Results reduce in
    round order per cell, so worker count and scheduling never change the
    report.
    """
    configs = [cfg for _, cfg in cells]
    for cfg in configs:
        cfg.validate()
    tasks = [
        (ci, ri, mix_seed(cfg.seed, ri))
        for ci, cfg in enumerate(configs)
        for ri in range(cfg.rounds)
    ]
    results: list[list[RoundResult | None]] = [[None] * cfg.rounds for cfg in configs]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        for ci, ri, seed in tasks:
            results[ci][ri] = run_round(configs[ci], seed)
    else:
        chunk = max(1, len(tasks) // (workers * 16))
        with Pool(workers, initializer=_init_pool, initargs=(configs,)) as pool:
            for ci, ri, res in pool.imap_unordered(_pool_round, tasks, chunksize=chunk):
                results[ci][ri] = res
    report = MetricsReport()
    for (key, _), cell_results in zip(cells, results):
        report.add(*key, aggregate(cell_results))
    return report


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> MetricsReport:
    """Run one configuration for its round count and aggregate the outcome."""
    key = (config.system_label(), config.category, config.cell_x())
    return execute_cells([(key, config)], workers=workers)


def build_sweep_cells(config: ExperimentConfig, sweep: SweepSpec
                      ) -> list[tuple[tuple[str, str, float], ExperimentConfig]]:
    """Expand a sweep into per-cell configs with independent derived seeds."""
    from dataclasses import replace

    cells = []
    for category in sweep.categories:
        for p in sweep.penetrations:
            cfg = replace(config, category=category, penetration=float(p),
                          stationary_density=0.0,
                          seed=mix_seed(config.seed, "mobile", category, float(p)))
            cells.append((("mobile", category, float(p)), cfg))
        for d in sweep.stationary_densities:
            cfg = replace(config, category=category, penetration=0.0,
                          stationary_density=float(d),
                          seed=mix_seed(config.seed, "stationary", category, float(d)))
            cells.append((("stationary", category, float(d)), cfg))
    return cells


def run_sweep(config: ExperimentConfig, sweep: SweepSpec,
              workers: int | None = None) -> MetricsReport:
    """Run every sweep cell and merge the summaries into one report."""
    if workers is None:
        workers = config.workers
    return execute_cells(build_sweep_cells(config, sweep), workers=workers)
