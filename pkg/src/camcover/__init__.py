"""Monte-Carlo simulator of street-event coverage by mobile and stationary cameras."""

from .config import ConfigError, ExperimentConfig, SweepSpec, parse_config
from .engine import (
    RoundResult,
    RoundStreams,
    build_scene,
    build_sweep_cells,
    execute_cells,
    mix_seed,
    run_experiment,
    run_round,
    run_sweep,
    simulate_scene,
)
from .events import EVENT_CATEGORIES, Event, EventCategory, footprint_cells, spawn_event
from .grid import (
    GraphPose,
    ObservationPoint,
    StreetGraph,
    build_grid,
    line_of_sight,
    place_observation_points,
)
from .metrics import (
    CellSummary,
    CoverageLog,
    MetricsReport,
    aggregate,
    detect,
    fragment_count,
    monitor,
    wilson_interval,
)
from .mobility import Fleet, Walker, heading, spawn_uniform, step
from .results import emit_results, manifest_dict
from .sensing import CameraInstance, CameraSpec, deploy_stationary, observed_set, visible
from .stitching import (
    AreaStream,
    Fragment,
    VehicleStreamBundle,
    associate,
    combine,
    relevance_intervals,
    stitch_bundles,
    truncate,
)

__version__ = "0.1.0"
