import numpy as np
import pytest

from camcover.grid import build_grid
from camcover.mobility import Fleet
from camcover.sensing import (
    STATIONARY,
    CameraInstance,
    CameraSpec,
    deploy_stationary,
    observed_set,
    visible,
)

VEHICLE_SPEC = CameraSpec(30.0, 60.0)
STATIONARY_SPEC = CameraSpec(50.0, 60.0)


def cam(x, y, heading, spec=VEHICLE_SPEC, cam_id=0):
    return CameraInstance(cam_id, spec, STATIONARY, np.array([x, y], dtype=float), heading)


@pytest.fixture(scope="module")
def grid():
    return build_grid(3, 3, 100.0, 20.0)


@pytest.mark.parametrize("range_m,half", [(0.0, 60.0), (-3.0, 60.0), (30.0, 0.0), (30.0, 200.0)])
def test_camera_spec_rejects_bad_values(range_m, half):
    with pytest.raises(ValueError):
        CameraSpec(range_m, half)


@pytest.mark.parametrize("density,expected", [(300.0, 300), (123.0, 123), (166.0, 166), (0.0, 0)])
def test_stationary_deployment_count(density, expected):
    g = build_grid(11, 11, 100.0, 20.0)
    cams = deploy_stationary(g, density, np.random.default_rng(1), STATIONARY_SPEC)
    assert len(cams) == expected


def test_stationary_deployment_geometry():
    g = build_grid(11, 11, 100.0, 20.0)
    cams = deploy_stationary(g, 300.0, np.random.default_rng(2), STATIONARY_SPEC)
    positions = np.array([c.position for c in cams])
    assert g.contains_points(positions).all()
    quarter = np.pi / 2
    for c in cams:
        k = c.heading / quarter
        assert k == pytest.approx(round(k), abs=1e-12)  # faces along a street axis


def test_stationary_deployment_rejects_negative_density():
    g = build_grid(3, 3, 100.0, 20.0)
    with pytest.raises(ValueError):
        deploy_stationary(g, -1.0, np.random.default_rng(1), STATIONARY_SPEC)


def test_visible_boresight_in_range(grid):
    assert visible(cam(0.0, 0.0, 0.0), (10.0, 0.0), grid, occlusion=False)


def test_visible_off_axis_rejected(grid):
    # 90 degrees off a 60 degree half-angle.
    assert not visible(cam(0.0, 0.0, 0.0), (0.0, 10.0), grid, occlusion=False)


def test_visible_out_of_range(grid):
    assert not visible(cam(0.0, 0.0, 0.0), (31.0, 0.0), grid, occlusion=False)


def test_visible_range_boundary_inclusive(grid):
    assert visible(cam(0.0, 0.0, 0.0), (30.0, 0.0), grid, occlusion=False)


def test_visible_angular_boundary():
    # 15/cos(60 deg) = 30: the target sits at 60 degrees off-axis, 30 m out.
    g = build_grid(3, 3, 100.0, 20.0)
    assert visible(cam(0.0, 0.0, 0.0), (15.0, 25.98), g, occlusion=False)


def test_target_at_camera_position_is_visible(grid):
    assert visible(cam(40.0, 0.0, 0.0), (40.0, 0.0), grid, occlusion=True)


def test_visible_occlusion_blocks_around_corner(grid):
    # Wide-angle camera so only the sight line decides.
    spec = CameraSpec(80.0, 180.0)
    c = cam(50.0, 0.0, np.pi, spec)
    assert visible(c, (0.0, 50.0), grid, occlusion=False)
    assert not visible(c, (0.0, 50.0), grid, occlusion=True)


def _random_scene(rng, grid, n_cams=8, n_targets=25):
    edges = rng.integers(0, grid.n_edges, size=n_cams + n_targets)
    offsets = rng.uniform(0, grid.edge_length, size=n_cams + n_targets)
    pts = grid.positions_on_edges(edges, offsets)
    cams = []
    for i in range(n_cams):
        spec = VEHICLE_SPEC if rng.random() < 0.5 else STATIONARY_SPEC
        cams.append(CameraInstance(i, spec, STATIONARY, pts[i],
                                   float(rng.uniform(0, 2 * np.pi))))
    return cams, pts[n_cams:]


def test_visible_monotone_in_range(grid):
    rng = np.random.default_rng(17)
    for _ in range(40):
        cams, targets = _random_scene(rng, grid)
        for c in cams:
            wider = CameraInstance(c.id, CameraSpec(c.spec.range_m + 20.0,
                                                    c.spec.fov_half_angle_deg),
                                   c.mount, c.position, c.heading)
            for t in targets:
                if visible(c, t, grid, occlusion=True):
                    assert visible(wider, t, grid, occlusion=True)


def test_visible_translation_equivariance_without_occlusion():
    # Coordinates on a 1/8 m lattice and integer shifts keep differences exact.
    g = build_grid(3, 3, 100.0, 20.0)
    big = build_grid(3, 3, 100.0, 20.0)
    rng = np.random.default_rng(19)
    for _ in range(200):
        cx, cy = rng.integers(0, 800, size=2) / 8.0
        tx, ty = rng.integers(0, 800, size=2) / 8.0
        h = float(rng.uniform(0, 2 * np.pi))
        shift = np.array(rng.integers(-20, 20, size=2), dtype=float)
        base = visible(cam(cx, cy, h), (tx, ty), g, occlusion=False)
        moved = visible(cam(cx + shift[0], cy + shift[1], h),
                        (tx + shift[0], ty + shift[1]), big, occlusion=False)
        assert base == moved


def test_observed_set_empty_inputs(grid):
    assert observed_set([], np.empty((0, 2)), grid) == set()
    assert observed_set([], np.array([[10.0, 0.0]]), grid) == set()
    assert observed_set([cam(0, 0, 0.0)], np.empty((0, 2)), grid) == set()


def test_observed_set_single_pair(grid):
    pairs = observed_set([cam(0.0, 0.0, 0.0, cam_id=7)], np.array([[10.0, 0.0]]),
                         grid, occlusion=True)
    assert pairs == {(7, 0)}


@pytest.mark.parametrize("occlusion", [False, True])
def test_observed_set_matches_bruteforce(grid, occlusion):
    rng = np.random.default_rng(29)
    for _ in range(30):
        cams, targets = _random_scene(rng, grid)
        fast = observed_set(cams, targets, grid, occlusion)
        slow = {
            (c.id, t)
            for c in cams
            for t in range(len(targets))
            if visible(c, targets[t], grid, occlusion)
        }
        assert fast == slow


def test_fleet_mounted_view(grid):
    # Forward-facing vehicle camera: a point ahead on the same street is seen,
    # the same point behind is not.
    fleet = Fleet(grid, [0], [40.0], [1], 15.0, turn_salt=1)
    pos = fleet.positions()[0]
    head = float(fleet.headings()[0])
    c = CameraInstance(0, VEHICLE_SPEC, 0, pos, head)
    assert visible(c, (60.0, 0.0), grid)
    assert not visible(c, (20.0, 0.0), grid)
