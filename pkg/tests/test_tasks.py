import math

import numpy as np
import pytest

from hgic.formation import FormationSpec
from hgic.tasks import (
    CoverageTask,
    Rect,
    SearchTask,
    TrackTask,
    lloyd_relax,
    lloyd_step,
    plan_area_search,
    polygon_area_centroid,
    update_tracking,
    voronoi_partition,
)
from hgic.world import UavState


def uav(i, pos, vel=(0, 0, 0)):
    return UavState(id=i, position=np.asarray(pos, dtype=float), velocity=np.asarray(vel, dtype=float))


def search(center=(0, 0, 30), radius=10.0, lane_spacing=5.0):
    return SearchTask(
        center=np.asarray(center, dtype=float),
        radius=radius,
        lane_spacing=lane_spacing,
        formation=FormationSpec(kind="circle", center=np.asarray(center, dtype=float), count=4),
    )


class TestAreaSearch:
    def test_degenerate_single_waypoint(self):
        wps = plan_area_search(search(radius=1.0, lane_spacing=10.0))
        assert len(wps) == 1
        assert np.allclose(wps[0], [0, 0, 30])

    def test_lane_heights_and_chords(self):
        wps = plan_area_search(search(radius=10.0, lane_spacing=5.0))
        ys = sorted({round(w[1], 9) for w in wps})
        assert ys == [-5.0, 0.0, 5.0]
        # Chord oracle: each lane must span +-sqrt(r^2 - y^2).
        for y in ys:
            lane = [w for w in wps if round(w[1], 9) == y]
            half = math.sqrt(10.0 ** 2 - y ** 2)
            assert sorted(round(w[0], 9) for w in lane) == pytest.approx([-half, half])

    def test_waypoints_inside_disk(self):
        task = search(center=(3, -2, 25), radius=17.0, lane_spacing=4.0)
        for w in plan_area_search(task):
            assert np.linalg.norm(w - task.center) <= 17.0 + 1e-9

    def test_lanes_visited_in_monotone_order_alternating(self):
        wps = plan_area_search(search(radius=10.0, lane_spacing=4.0))
        lane_ys = [w[1] for w in wps[::2]]
        assert lane_ys == sorted(lane_ys)
        # Boustrophedon: consecutive lanes traverse in opposite x directions.
        directions = [np.sign(wps[2 * i + 1][0] - wps[2 * i][0]) for i in range(len(wps) // 2)]
        assert all(directions[i] != directions[i + 1] for i in range(len(directions) - 1))

    def test_validation(self):
        with pytest.raises(ValueError):
            search(radius=-1.0)


class TestTracking:
    def task(self, rng=100.0, standoff=10.0):
        return TrackTask(target_id=9, perception_range=rng, standoff_radius=standoff)

    def test_out_of_range_no_change(self):
        trackers = [uav(i, (i * 5.0, 0, 30)) for i in range(4)]
        target = uav(9, (500.0, 0, 30))
        assert update_tracking(trackers, target, self.task()) is None

    def test_any_tracker_in_range_switches_all(self):
        trackers = [uav(0, (90.0, 0, 30))] + [uav(i, (300.0 + i, 0, 30)) for i in (1, 2)]
        target = uav(9, (0.0, 0, 30))
        desired = update_tracking(trackers, target, self.task())
        assert desired is not None
        assert set(desired) == {0, 1, 2}

    def test_desired_points_on_standoff_circle(self):
        trackers = [uav(i, (30.0 + i, i * 2.0, 30)) for i in range(5)]
        target = uav(9, (0.0, 0, 30))
        desired = update_tracking(trackers, target, self.task())
        for p in desired.values():
            assert np.linalg.norm(p - target.position) == pytest.approx(10.0)

    def test_steady_state_standoff_distance(self):
        """Closed-loop fixed point: P-control onto the standoff slots."""
        from hgic.engine import SimulationEngine
        from hgic.scenario import parse_scenario

        doc = {
            "name": "track-fixture",
            "seed": 3,
            "duration_s": 20.0,
            "uav_count": 5,
            "placement": {"kind": "circle", "center": [0, 0, 30], "radius": 20.0},
            "formation": {"kind": "circle", "center": [0, 0, 30], "scale": 20.0},
            "initial_mode": "task",
            "commands": [
                {"tick": 10, "verb": "start_track",
                 "args": {"target_id": 0, "perception_range": 150.0, "standoff_radius": 10.0}}
            ],
        }
        engine = SimulationEngine(parse_scenario(doc))
        for _ in range(engine.scenario.total_ticks):
            engine.step()
        target = engine.world.uav_by_id(0)
        for u in engine.world.uavs:
            if u.id == 0:
                continue
            d = np.linalg.norm(u.position - target.position)
            assert d == pytest.approx(10.0, abs=0.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            TrackTask(target_id=0, perception_range=5.0, standoff_radius=10.0)
        with pytest.raises(ValueError):
            update_tracking([], uav(9, (0, 0, 0)), self.task())


REGION = Rect(0.0, 0.0, 100.0, 80.0)


def polygon_contains(poly, p, eps=1e-9):
    """Convex-cell membership via edge cross products (cells are CCW)."""
    m = len(poly)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < -eps * max(1.0, abs(b[0] - a[0]) + abs(b[1] - a[1])):
            return False
    return True


class TestVoronoi:
    def test_single_site_owns_region(self):
        cells = voronoi_partition(np.array([[50.0, 40.0]]), REGION)
        area, _ = polygon_area_centroid(cells[0])
        assert area == pytest.approx(REGION.area)

    def test_two_mirror_sites_halve_the_region(self):
        cells = voronoi_partition(np.array([[25.0, 40.0], [75.0, 40.0]]), REGION)
        for cell, expected_x in zip(cells, (0.0, 50.0)):
            area, centroid = polygon_area_centroid(cell)
            assert area == pytest.approx(REGION.area / 2)
            xs = sorted({round(v[0], 9) for v in cell})
            assert xs == [expected_x, expected_x + 50.0]

    def test_grid_oracle_agreement(self):
        rng = np.random.default_rng(0)
        sites = np.column_stack(
            [rng.uniform(5, 95, 7), rng.uniform(5, 75, 7)]
        )
        cells = voronoi_partition(sites, REGION)
        gx, gy = np.meshgrid(np.linspace(0.5, 99.5, 100), np.linspace(0.5, 79.5, 100))
        samples = np.column_stack([gx.ravel(), gy.ravel()])
        d2 = ((samples[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2)
        nearest = d2.argmin(axis=1)
        agree = sum(
            polygon_contains(cells[nearest[k]], samples[k]) for k in range(len(samples))
        )
        assert agree == len(samples)

    def test_cells_tile_region(self):
        rng = np.random.default_rng(4)
        sites = np.column_stack([rng.uniform(2, 98, 12), rng.uniform(2, 78, 12)])
        cells = voronoi_partition(sites, REGION)
        total = sum(polygon_area_centroid(c)[0] for c in cells)
        assert total == pytest.approx(REGION.area, rel=1e-6)

    def test_duplicate_sites_perturbed_deterministically(self):
        sites = np.array([[50.0, 40.0], [50.0, 40.0], [20.0, 20.0]])
        cells_a = voronoi_partition(sites, REGION)
        cells_b = voronoi_partition(sites, REGION)
        assert len(cells_a) == 3
        for a, b in zip(cells_a, cells_b):
            assert np.array_equal(a, b)
        total = sum(polygon_area_centroid(c)[0] for c in cells_a)
        assert total == pytest.approx(REGION.area, rel=1e-6)


def quadrature_cost(sites, region, resolution=120):
    """Grid-quadrature coverage cost: sum over cells of dist^2 to the site."""
    xs = np.linspace(region.x0, region.x1, resolution, endpoint=False) + (
        (region.x1 - region.x0) / resolution / 2
    )
    ys = np.linspace(region.y0, region.y1, resolution, endpoint=False) + (
        (region.y1 - region.y0) / resolution / 2
    )
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    d2 = ((pts[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2).min(axis=1)
    return d2.sum() * region.area / len(pts)


def exact_cost(sites, region):
    """Closed-form coverage cost: triangulate each cell and integrate
    |q - site|^2 exactly (quadratic over a triangle)."""
    from hgic.tasks import voronoi_partition

    total = 0.0
    for site, poly in zip(sites, voronoi_partition(sites, region)):
        if len(poly) < 3:
            continue
        rel = poly - site
        a = rel[0]
        for i in range(1, len(rel) - 1):
            b, c = rel[i], rel[i + 1]
            area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            s = (
                a @ a + b @ b + c @ c + a @ b + b @ c + a @ c
            )
            total += abs(area2) / 2.0 * s / 6.0
    return total


class TestLloyd:
    def test_single_center_site_fixed_point(self):
        sites = np.array([[50.0, 40.0]])
        out = lloyd_step(sites, REGION)
        assert out == pytest.approx(sites, abs=1e-9)

    def test_centroidal_pair_fixed_point(self):
        sites = np.array([[25.0, 40.0], [75.0, 40.0]])
        out = lloyd_step(sites, REGION)
        assert out == pytest.approx(sites, abs=1e-9)

    def test_cost_non_increasing(self):
        rng = np.random.default_rng(6)
        sites = np.column_stack([rng.uniform(5, 95, 5), rng.uniform(5, 75, 5)])
        cost = quadrature_cost(sites, REGION)
        for _ in range(30):
            sites = lloyd_step(sites, REGION)
            nxt = quadrature_cost(sites, REGION)
            assert nxt <= cost * (1 + 1e-9) + 1e-9
            cost = nxt

    def test_relax_stops_on_tolerance(self):
        rng = np.random.default_rng(8)
        sites = np.column_stack([rng.uniform(5, 95, 4), rng.uniform(5, 75, 4)])
        out, iters = lloyd_relax(sites, REGION, tolerance=0.05, max_iters=500)
        assert iters < 500
        moved = np.linalg.norm(lloyd_step(out, REGION) - out, axis=1).max()
        assert moved < 0.05

    def test_validation(self):
        with pytest.raises(ValueError):
            CoverageTask(region=Rect(0, 0, 0, 10))
        with pytest.raises(ValueError):
            CoverageTask(region=REGION, tolerance=0.0)
