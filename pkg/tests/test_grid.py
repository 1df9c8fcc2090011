import math

import numpy as np
import pytest

from camcover.grid import (
    build_grid,
    line_of_sight,
    line_of_sight_many,
    place_observation_points,
)


def los_oracle(graph, a, b):
    """Reference sight test: plain loop over <=0.5 m samples, endpoints included."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    dist = math.hypot(b[0] - a[0], b[1] - a[1])
    n = math.ceil(dist / 0.5) + 1
    for k in range(n):
        t = k / (n - 1) if n > 1 else 0.0
        if not graph.contains_point(a + t * (b - a)):
            return False
    return True


def test_smallest_grid_counts():
    g = build_grid(2, 2, 100.0, 20.0)
    assert g.n_vertices == 4
    assert g.n_edges == 4
    assert g.total_street_length == 400.0


def test_default_grid_counts():
    g = build_grid(11, 11, 100.0, 20.0)
    assert g.n_vertices == 121
    assert g.n_edges == 220
    assert g.total_street_length == 22000.0
    assert g.width == 1000.0 and g.height == 1000.0
    assert g.area_km2 == pytest.approx(1.0)


def test_3x2_grid_degree_sequence():
    g = build_grid(3, 2, 100.0, 20.0)
    assert sorted(g.degree.tolist()) == [2, 2, 2, 2, 3, 3]
    assert int((g.degree == 4).sum()) == 0


@pytest.mark.parametrize("nx,ny", [(2, 3), (4, 4), (7, 3), (11, 11), (5, 9)])
def test_total_length_formula(nx, ny):
    block = 80.0
    g = build_grid(nx, ny, block, 10.0)
    assert g.total_street_length == pytest.approx(block * (nx * (ny - 1) + ny * (nx - 1)))


@pytest.mark.parametrize(
    "nx,ny,block,corridor",
    [(1, 2, 100, 20), (2, 1, 100, 20), (2, 2, 0, 20), (2, 2, -5, 20),
     (2, 2, 100, 0), (2, 2, 100, -1), (2, 2, 100, 100), (2, 2, 100, 150)],
)
def test_build_grid_rejects_bad_dimensions(nx, ny, block, corridor):
    with pytest.raises(ValueError):
        build_grid(nx, ny, block, corridor)


def test_centerline_points_inside_corridor():
    g = build_grid(4, 3, 100.0, 20.0)
    rng = np.random.default_rng(5)
    edges = rng.integers(0, g.n_edges, size=500)
    offsets = rng.uniform(0, g.edge_length, size=500)
    points = g.positions_on_edges(edges, offsets)
    assert g.contains_points(points).all()


def test_block_interior_outside_corridor():
    g = build_grid(2, 2, 100.0, 20.0)
    assert not g.contains_point((50.0, 50.0))
    assert not g.contains_point((30.0, 70.0))


def test_corridor_boundary_inclusive():
    g = build_grid(2, 2, 100.0, 20.0)
    assert g.contains_point((10.0, 50.0))       # exactly half a corridor off a street
    assert not g.contains_point((10.0001, 50.0))
    assert g.contains_point((0.0, -10.0))       # rim of the outermost street
    assert not g.contains_point((0.0, -10.0001))


def test_observation_points_2x2_spacing_50():
    g = build_grid(2, 2, 100.0, 20.0)
    pts = place_observation_points(g, 50.0)
    assert len(pts) == 8
    expected = {
        (0.0, 0.0), (50.0, 0.0), (100.0, 0.0), (0.0, 100.0),
        (50.0, 100.0), (100.0, 100.0), (0.0, 50.0), (100.0, 50.0),
    }
    assert {p.position for p in pts} == expected
    assert [p.id for p in pts] == list(range(8))


@pytest.mark.parametrize("spacing", [100.0, 150.0, 1000.0])
def test_observation_points_endpoints_always_present(spacing):
    # No interior multiple fits: every edge contributes only its endpoints.
    g = build_grid(2, 2, 100.0, 20.0)
    pts = place_observation_points(g, spacing)
    assert {p.position for p in pts} == {(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0)}


def test_observation_point_count_monotone_in_spacing():
    g = build_grid(5, 4, 100.0, 20.0)
    spacings = [5.0, 10.0, 20.0, 25.0, 50.0, 100.0, 400.0]
    counts = [len(place_observation_points(g, s)) for s in spacings]
    assert counts == sorted(counts, reverse=True)


def test_observation_points_lie_in_corridor_and_dedupe():
    g = build_grid(4, 4, 100.0, 20.0)
    pts = place_observation_points(g, 25.0)
    coords = np.array([p.position for p in pts])
    assert g.contains_points(coords).all()
    assert len({p.position for p in pts}) == len(pts)


def test_observation_points_reject_bad_spacing():
    g = build_grid(2, 2, 100.0, 20.0)
    with pytest.raises(ValueError):
        place_observation_points(g, 0.0)


def test_los_same_street():
    g = build_grid(3, 3, 100.0, 20.0)
    assert line_of_sight(g, (10.0, 0.0), (50.0, 0.0))


def test_los_blocked_around_corner():
    # Perpendicular streets: the segment cuts through the building block corner.
    g = build_grid(3, 3, 100.0, 20.0)
    assert not line_of_sight(g, (50.0, 0.0), (0.0, 50.0))


def test_los_degenerate_segment():
    g = build_grid(3, 3, 100.0, 20.0)
    assert line_of_sight(g, (40.0, 0.0), (40.0, 0.0))


def test_los_near_intersection_is_clear():
    # Close to a crossing both endpoints sit inside the overlapping corridors.
    g = build_grid(3, 3, 100.0, 20.0)
    assert line_of_sight(g, (92.0, 0.0), (100.0, 8.0))


def test_los_symmetry():
    g = build_grid(3, 3, 100.0, 20.0)
    rng = np.random.default_rng(11)
    edges = rng.integers(0, g.n_edges, size=80)
    offsets = rng.uniform(0, g.edge_length, size=80)
    pts = g.positions_on_edges(edges, offsets)
    a, b = pts[:40], pts[40:]
    assert np.array_equal(line_of_sight_many(g, a, b), line_of_sight_many(g, b, a))


def test_los_matches_sampled_oracle():
    # Covers both the convex same-strip fast path and the sampled fallback.
    g = build_grid(3, 3, 100.0, 20.0)
    rng = np.random.default_rng(23)
    edges = rng.integers(0, g.n_edges, size=300)
    offsets = rng.uniform(0, g.edge_length, size=300)
    pts = g.positions_on_edges(edges, offsets)
    jitter = rng.uniform(-9.0, 9.0, size=(300, 2))
    pts = pts + jitter * (g.contains_points(pts + jitter))[:, None]
    a, b = pts[:150], pts[150:]
    fast = line_of_sight_many(g, a, b)
    slow = np.array([los_oracle(g, a[i], b[i]) for i in range(len(a))])
    assert np.array_equal(fast, slow)
