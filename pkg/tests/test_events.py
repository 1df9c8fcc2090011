import numpy as np
import pytest
from scipy import stats

from camcover.events import (
    EVENT_CATEGORIES,
    Event,
    footprint_cells,
    footprint_cells_indexed,
    spawn_event,
    spiral_offsets,
)
from camcover.grid import GraphPose, build_grid
from camcover.mobility import EVENT_CENTER, Walker, step

SPAWN_KS_SEED = 1703


def test_builtin_categories_match_table():
    assert EVENT_CATEGORIES["explosion"].duration_s == 2.0
    assert EVENT_CATEGORIES["explosion"].area_m2 == 2.0
    assert EVENT_CATEGORIES["explosion"].speed_mps == 0.0
    assert EVENT_CATEGORIES["picket"].duration_s == 600.0
    assert EVENT_CATEGORIES["picket"].area_m2 == 100.0
    assert EVENT_CATEGORIES["picket"].speed_mps == 1.0
    assert EVENT_CATEGORIES["robbery"].duration_s == 10.0
    assert EVENT_CATEGORIES["robbery"].area_m2 == 1.0
    assert EVENT_CATEGORIES["robbery"].speed_mps == 5.0
    assert EVENT_CATEGORIES["vehicle"].duration_s == 1800.0
    assert EVENT_CATEGORIES["vehicle"].area_m2 == 8.0
    assert EVENT_CATEGORIES["vehicle"].speed_mps == 15.0


def test_spiral_first_cells():
    assert spiral_offsets(1).tolist() == [[0, 0]]
    assert spiral_offsets(2).tolist() == [[0, 0], [1, 0]]
    assert spiral_offsets(8).tolist() == [
        [0, 0], [1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1]
    ]


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 10])
def test_spiral_squares_tile_blocks(k):
    cells = spiral_offsets(k * k)
    xs, ys = cells[:, 0], cells[:, 1]
    assert len({(int(x), int(y)) for x, y in cells}) == k * k
    assert xs.max() - xs.min() == k - 1
    assert ys.max() - ys.min() == k - 1


def test_spiral_rejects_zero():
    with pytest.raises(ValueError):
        spiral_offsets(0)


def test_spawned_event_counts_cells():
    g = build_grid(3, 3, 100.0, 20.0)
    rng = np.random.default_rng(1)
    assert spawn_event(EVENT_CATEGORIES["robbery"], g, 3600.0, rng).n_cells == 1
    assert spawn_event(EVENT_CATEGORIES["explosion"], g, 3600.0, rng).n_cells == 2
    assert spawn_event(EVENT_CATEGORIES["vehicle"], g, 3600.0, rng).n_cells == 8
    assert spawn_event(EVENT_CATEGORIES["picket"], g, 3600.0, rng).n_cells == 100


def test_explosion_center_is_static():
    g = build_grid(3, 3, 100.0, 20.0)
    event = spawn_event(EVENT_CATEGORIES["explosion"], g, 3600.0, np.random.default_rng(2))
    assert event.center.speed == 0.0
    assert event.center.kind == EVENT_CENTER
    assert event.end_time - event.spawn_time == 2.0
    moved = step(event.center, g, 0.05, np.random.default_rng(3))
    assert moved.pose == event.center.pose


def test_spawn_time_fits_round():
    g = build_grid(3, 3, 100.0, 20.0)
    rng = np.random.default_rng(4)
    for _ in range(200):
        event = spawn_event(EVENT_CATEGORIES["vehicle"], g, 3600.0, rng)
        assert 0.0 <= event.spawn_time <= 1800.0


def test_spawn_time_uniform():
    g = build_grid(3, 3, 100.0, 20.0)
    rng = np.random.default_rng(SPAWN_KS_SEED)
    times = [spawn_event(EVENT_CATEGORIES["vehicle"], g, 3600.0, rng).spawn_time
             for _ in range(10_000)]
    assert stats.kstest(times, "uniform", args=(0.0, 1800.0)).pvalue > 0.01


def test_spawn_rejects_short_round():
    g = build_grid(3, 3, 100.0, 20.0)
    with pytest.raises(ValueError):
        spawn_event(EVENT_CATEGORIES["picket"], g, 500.0, np.random.default_rng(5))


def test_footprint_robbery_single_cell_at_center():
    g = build_grid(3, 3, 100.0, 20.0)
    event = spawn_event(EVENT_CATEGORIES["robbery"], g, 3600.0, np.random.default_rng(6))
    cells = footprint_cells(event, g, event.spawn_time)
    center = g.pose_position(event.center.pose)
    assert cells.shape == (1, 2)
    assert np.allclose(cells[0], center)


def test_footprint_picket_block_before_clipping():
    g = build_grid(3, 3, 100.0, 20.0)
    event = spawn_event(EVENT_CATEGORIES["picket"], g, 3600.0, np.random.default_rng(7))
    offsets = event.cell_offsets
    assert offsets.shape == (100, 2)
    assert offsets[:, 0].max() - offsets[:, 0].min() == 9.0
    assert offsets[:, 1].max() - offsets[:, 1].min() == 9.0


def test_footprint_explosion_center_plus_neighbor():
    g = build_grid(3, 3, 100.0, 20.0)
    center = Walker(0, GraphPose(0, 40.0, 1), 0.0, EVENT_CENTER)
    event = Event(EVENT_CATEGORIES["explosion"], 10.0, center,
                  spiral_offsets(2).astype(float))
    cells = footprint_cells(event, g, 10.0)
    assert np.allclose(cells, [[40.0, 0.0], [41.0, 0.0]])


def test_footprint_clips_at_grid_corner():
    # A picket centered on the corner vertex: the 16 cells with x < 0 and
    # y < 0 fall outside both boundary corridors.
    g = build_grid(3, 3, 100.0, 20.0)
    center = Walker(0, GraphPose(0, 0.0, 1), 0.0, EVENT_CENTER)
    event = Event(EVENT_CATEGORIES["picket"], 0.0, center, spiral_offsets(100).astype(float))
    cells, idx = footprint_cells_indexed(event, g, 0.0)
    assert len(cells) == 84
    assert g.contains_points(cells).all()
    assert idx.max() < 100
    assert all(x >= 0.0 or y >= 0.0 for x, y in cells)


def test_footprint_interior_center_keeps_all_cells():
    g = build_grid(3, 3, 100.0, 20.0)
    center = Walker(0, GraphPose(0, 50.0, 1), 0.0, EVENT_CENTER)
    event = Event(EVENT_CATEGORIES["picket"], 0.0, center, spiral_offsets(100).astype(float))
    assert len(footprint_cells(event, g, 0.0)) == 100


def test_footprint_never_empty_and_translates_rigidly():
    g = build_grid(3, 3, 100.0, 20.0)
    rng = np.random.default_rng(8)
    for _ in range(50):
        event = spawn_event(EVENT_CATEGORIES["picket"], g, 3600.0, rng)
        cells0 = footprint_cells(event, g, event.spawn_time)
        assert len(cells0) > 0
        before = g.pose_position(event.center.pose)
        offsets_before = event.cell_offsets.copy()
        event.center = step(event.center, g, 0.05, rng)
        after = g.pose_position(event.center.pose)
        # Cells stay rigidly bound to the center: same offsets, moved origin.
        assert np.array_equal(event.cell_offsets, offsets_before)
        # Straight-line displacement equals speed*dt except across a corner.
        assert np.linalg.norm(after - before) <= 0.05 + 1e-9


def test_footprint_query_outside_interval():
    g = build_grid(3, 3, 100.0, 20.0)
    event = spawn_event(EVENT_CATEGORIES["explosion"], g, 3600.0, np.random.default_rng(9))
    with pytest.raises(ValueError):
        footprint_cells(event, g, event.spawn_time - 0.1)
    with pytest.raises(ValueError):
        footprint_cells(event, g, event.end_time + 0.1)
