import math

import numpy as np
import pytest

from hgic.geom import vec3
from hgic.world import (
    Box,
    MissionMetrics,
    MotionLimits,
    SwarmWorld,
    UavState,
    detect_collisions,
    spacing_error,
    step_world,
)


def make_world(positions, velocities=None, dt=0.02, limits=None):
    n = len(positions)
    velocities = velocities or [np.zeros(3)] * n
    uavs = [
        UavState(id=i, position=np.asarray(p, dtype=float), velocity=np.asarray(v, dtype=float))
        for i, (p, v) in enumerate(zip(positions, velocities))
    ]
    return SwarmWorld(uavs=uavs, dt=dt, limits=limits or MotionLimits())


class TestStepWorld:
    def test_zero_commands_fixed_point(self):
        w = make_world([[0, 0, 10], [5, 0, 10]])
        before = w.positions()
        step_world(w, np.zeros((2, 3)))
        assert np.array_equal(w.positions(), before)
        assert w.tick == 1

    def test_euler_step_from_rest(self):
        w = make_world([[0, 0, 10]], limits=MotionLimits(v_max=10, a_max=50))
        step_world(w, np.array([[1.0, 0.0, 0.0]]))
        assert np.allclose(w.uavs[0].position, [0.02, 0.0, 10.0])
        assert np.allclose(w.uavs[0].velocity, [1.0, 0.0, 0.0])

    def test_speed_capped_at_v_max(self):
        w = make_world([[0, 0, 10]], limits=MotionLimits(v_max=10, a_max=1e9))
        step_world(w, np.array([[25.0, 0.0, 0.0]]))
        assert np.linalg.norm(w.uavs[0].velocity) <= 10.0 + 1e-12

    def test_acceleration_limited(self):
        w = make_world([[0, 0, 10]], limits=MotionLimits(v_max=10, a_max=20))
        step_world(w, np.array([[10.0, 0.0, 0.0]]))
        # One tick at a_max=20, dt=0.02 can add at most 0.4 m/s.
        assert np.allclose(w.uavs[0].velocity, [0.4, 0.0, 0.0])

    def test_command_count_mismatch_rejected(self):
        w = make_world([[0, 0, 10], [5, 0, 10]])
        with pytest.raises(ValueError, match="expected 2"):
            step_world(w, np.zeros((3, 3)))

    def test_boundary_clamp_zeroes_wall_component(self):
        w = make_world([[0, 0, 10]])
        w.region = Box(vec3(-1, -1, 0), vec3(1, 1, 20))
        for _ in range(200):
            step_world(w, np.array([[10.0, 3.0, 0.0]]))
        assert w.uavs[0].position[0] == 1.0
        assert w.uavs[0].velocity[0] == 0.0
        assert w.uavs[0].position[1] == 1.0

    def test_speed_cap_invariant_random_commands(self):
        rng = np.random.default_rng(3)
        w = make_world(rng.uniform(-50, 50, (6, 3)).tolist())
        for _ in range(300):
            step_world(w, rng.uniform(-40, 40, (6, 3)))
            for u in w.uavs:
                assert np.linalg.norm(u.velocity) <= w.limits.v_max + 1e-12
                assert w.region.contains(u.position)


class TestDetectCollisions:
    def test_far_apart(self):
        w = make_world([[0, 0, 10], [50, 0, 10]])
        assert detect_collisions(w, 1.0) == 0

    def test_edge_triggered_once_per_crossing(self):
        w = make_world([[0, 0, 10], [1.2, 0, 10]])
        assert detect_collisions(w, 1.0) == 0
        w.uavs[1].position = np.array([0.8, 0.0, 10.0])
        assert detect_collisions(w, 1.0) == 1
        # Staying below does not re-count.
        w.uavs[1].position = np.array([0.5, 0.0, 10.0])
        assert detect_collisions(w, 1.0) == 0
        assert w.metrics.collision_count == 1
        # Separating and re-entering counts again.
        w.uavs[1].position = np.array([3.0, 0.0, 10.0])
        assert detect_collisions(w, 1.0) == 0
        w.uavs[1].position = np.array([0.9, 0.0, 10.0])
        assert detect_collisions(w, 1.0) == 1

    def test_three_uavs_converging_all_pairs(self):
        # Independent oracle: brute force over all unordered pairs.
        w = make_world([[0, 0, 10], [10, 0, 10], [0, 10, 10]])
        assert detect_collisions(w, 1.0) == 0
        target = np.array([5.0, 5.0, 10.0])
        for u in w.uavs:
            u.position = target + 0.01 * np.array([u.id, -u.id, 0.0])
        expected = 0
        for i in range(3):
            for j in range(i + 1, 3):
                if np.linalg.norm(w.uavs[i].position - w.uavs[j].position) < 1.0:
                    expected += 1
        assert expected == 3
        assert detect_collisions(w, 1.0) == expected

    def test_monotone_and_trivial_counts(self):
        w = make_world([[0, 0, 10]])
        assert detect_collisions(w, 1.0) == 0
        assert w.metrics.collision_count == 0
        empty = SwarmWorld(uavs=[])
        assert detect_collisions(empty, 1.0) == 0

    def test_rejects_bad_radius(self):
        w = make_world([[0, 0, 10]])
        with pytest.raises(ValueError):
            detect_collisions(w, 0.0)


class TestSpacingError:
    def test_on_slot_zero(self):
        pts = [[0, 0, 10], [5, 0, 10], [0, 5, 10]]
        w = make_world(pts)
        slots = [np.asarray(p, dtype=float) for p in pts]
        assert spacing_error(w, slots, [0, 1, 2]) == 0.0

    def test_single_offset_among_five(self):
        pts = [[float(i), 0, 10] for i in range(5)]
        w = make_world(pts)
        slots = [np.asarray(p, dtype=float) for p in pts]
        w.uavs[2].position = w.uavs[2].position + np.array([0.0, 2.0, 0.0])
        assert spacing_error(w, slots, [0, 1, 2, 3, 4]) == pytest.approx(0.4)

    def test_matches_direct_recomputation(self):
        rng = np.random.default_rng(9)
        pts = rng.uniform(-20, 20, (8, 3))
        slots = rng.uniform(-20, 20, (8, 3))
        perm = list(rng.permutation(8))
        w = make_world(pts.tolist())
        # Oracle: plain mean of Euclidean distances.
        expected = np.mean(
            [math.dist(pts[i], slots[perm[i]]) for i in range(8)]
        )
        got = spacing_error(w, [slots[i] for i in range(8)], [int(p) for p in perm])
        assert got == pytest.approx(expected, rel=1e-12)

    def test_size_mismatch(self):
        w = make_world([[0, 0, 10], [1, 0, 10]])
        with pytest.raises(ValueError):
            spacing_error(w, [np.zeros(3)], [0, 1])
        with pytest.raises(ValueError):
            spacing_error(w, [np.zeros(3), np.ones(3)], [0, 0])


def test_metrics_summary_row_names():
    m = MissionMetrics()
    m.record_speeds(np.array([1.0, 3.0]), 0.02)
    m.spacing_error_series.append(1.5)
    m.collision_count = 2
    s = m.summary()
    assert set(s) == {
        "duration_s", "max_velocity", "avg_velocity",
        "avg_spacing_error", "max_spacing_error", "collisions",
    }
    assert s["max_velocity"] == 3.0
    assert s["collisions"] == 2
