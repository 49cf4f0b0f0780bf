import math

import numpy as np
import pytest

from hgic.flocking import (
    FlockParams,
    alignment_velocity,
    cohesion_velocity,
    combine_velocity,
    half_spring_repulsion,
    migration_velocity,
    obstacle_avoidance_velocity,
    separation_velocity,
)
from hgic.world import Obstacle, UavState


def uav(i, pos, vel=(0, 0, 0)):
    return UavState(id=i, position=np.asarray(pos, dtype=float), velocity=np.asarray(vel, dtype=float))


P = FlockParams()


class TestSeparation:
    def test_zero_outside_radius(self):
        me = uav(0, (0, 0, 0))
        assert np.array_equal(separation_velocity(me, [uav(1, (P.r_sep + 1, 0, 0))], P), np.zeros(3))

    def test_mirror_symmetric_cancels(self):
        me = uav(0, (0, 0, 0))
        nbs = [uav(1, (3, 0, 0)), uav(2, (-3, 0, 0))]
        assert np.allclose(separation_velocity(me, nbs, P), 0.0, atol=1e-15)

    def test_formula_oracle(self):
        p = FlockParams(r_sep=5.0, c_sep=1.0)
        me = uav(0, (0, 0, 0))
        nb = uav(1, (3, 0, 0))
        out = separation_velocity(me, [nb], p)
        # Oracle: c_sep * (r_sep - d) * unit(x_i - x_j) computed directly.
        expected = 1.0 * (5.0 - 3.0) * np.array([-1.0, 0.0, 0.0])
        assert np.allclose(out, expected)
        assert np.linalg.norm(out) == pytest.approx(2.0)

    def test_coincident_tie_break_deterministic_and_antisymmetric(self):
        a = uav(0, (1, 1, 1))
        b = uav(1, (1, 1, 1))
        va = separation_velocity(a, [b], P)
        vb = separation_velocity(b, [a], P)
        assert np.linalg.norm(va) > 0
        assert np.allclose(va, -vb)
        assert np.array_equal(va, separation_velocity(a, [b], P))


class TestCohesion:
    def test_no_neighbors(self):
        assert np.array_equal(cohesion_velocity(uav(0, (0, 0, 0)), [], P), np.zeros(3))

    def test_at_centroid(self):
        me = uav(0, (0, 0, 0))
        nbs = [uav(1, (4, 0, 0)), uav(2, (-4, 0, 0))]
        assert np.allclose(cohesion_velocity(me, nbs, P), 0.0, atol=1e-15)

    def test_formula_oracle(self):
        p = FlockParams(c_coh=0.5)
        me = uav(0, (0, 0, 0))
        out = cohesion_velocity(me, [uav(1, (4, 0, 0))], p)
        assert np.allclose(out, [2.0, 0.0, 0.0])


class TestAlignment:
    def test_matched_velocity_is_zero(self):
        me = uav(0, (0, 0, 0), (1, 2, 0))
        nbs = [uav(1, (1, 0, 0), (1, 2, 0)), uav(2, (0, 1, 0), (1, 2, 0))]
        assert np.allclose(alignment_velocity(me, nbs, P), 0.0, atol=1e-15)

    def test_no_neighbors(self):
        assert np.array_equal(alignment_velocity(uav(0, (0, 0, 0), (3, 0, 0)), [], P), np.zeros(3))

    def test_formula_oracle(self):
        p = FlockParams(c_align=1.0)
        me = uav(0, (0, 0, 0), (0, 0, 0))
        nbs = [uav(1, (1, 0, 0), (2, 0, 0)), uav(2, (0, 1, 0), (0, 2, 0))]
        assert np.allclose(alignment_velocity(me, nbs, p), [1.0, 1.0, 0.0])


class TestHalfSpring:
    def test_boundary_exactly_r_rep(self):
        me = uav(0, (0, 0, 0))
        assert np.array_equal(half_spring_repulsion(me, [uav(1, (P.r_rep, 0, 0))], P), np.zeros(3))

    def test_beyond_r_rep(self):
        me = uav(0, (0, 0, 0))
        assert np.array_equal(half_spring_repulsion(me, [uav(1, (P.r_rep + 2, 0, 0))], P), np.zeros(3))

    def test_half_distance_magnitude(self):
        me = uav(0, (0, 0, 0))
        out = half_spring_repulsion(me, [uav(1, (P.r_rep / 2, 0, 0))], P)
        assert np.linalg.norm(out) == pytest.approx(P.p_rep * P.r_rep / 2)
        assert out[0] < 0  # points away from the neighbor

    def test_strictly_repulsive_no_attractive_branch(self):
        # At any separation, the half-spring never pulls inward.
        me = uav(0, (0, 0, 0))
        for d in np.linspace(0.1, 10.0, 40):
            out = half_spring_repulsion(me, [uav(1, (d, 0, 0))], P)
            assert out[0] <= 0.0


class TestObstacleAvoidance:
    def test_out_of_range(self):
        me = uav(0, (0, 0, 0))
        obs = [Obstacle(np.array([20.0, 0, 0]), 2.0)]
        assert np.array_equal(obstacle_avoidance_velocity(me, obs, P), np.zeros(3))

    def test_collinear_pointing_away(self):
        me = uav(0, (0, 0, 0))
        obs = [Obstacle(np.array([5.0, 0, 0]), 2.0)]
        out = obstacle_avoidance_velocity(me, obs, P)
        assert out[0] < 0 and out[1] == 0 and out[2] == 0

    def test_formula_oracle(self):
        p = FlockParams(r_obs=5.0, c_obs=1.0)
        me = uav(0, (0, 0, 0))
        out = obstacle_avoidance_velocity(me, [Obstacle(np.array([4.0, 0, 0]), 2.0)], p)
        assert np.linalg.norm(out) == pytest.approx(3.0)

    def test_inside_obstacle_full_gain_away_from_center(self):
        p = FlockParams(r_obs=5.0, c_obs=1.0)
        me = uav(0, (1.0, 0, 0))
        out = obstacle_avoidance_velocity(me, [Obstacle(np.zeros(3), 2.0)], p)
        assert out[0] == pytest.approx(5.0)


class TestMigration:
    def test_at_target(self):
        me = uav(0, (10, 10, 10))
        assert np.array_equal(migration_velocity(me, np.array([10.0, 10, 10]), P), np.zeros(3))

    def test_due_east(self):
        me = uav(0, (0, 0, 0))
        assert np.allclose(migration_velocity(me, np.array([100.0, 0, 0]), P), [P.v_mig, 0, 0])

    def test_magnitude_is_exactly_v_mig(self):
        rng = np.random.default_rng(4)
        me = uav(0, rng.uniform(-50, 50, 3))
        target = rng.uniform(-50, 50, 3)
        out = migration_velocity(me, target, P)
        assert np.linalg.norm(out) == pytest.approx(P.v_mig, rel=1e-12)


class TestCombine:
    def test_single_term_untouched(self):
        v = np.array([1.0, 2.0, 0.5])
        assert np.array_equal(combine_velocity([v], 10.0), v)

    def test_opposite_terms_cancel(self):
        v = np.array([3.0, -1.0, 2.0])
        assert np.allclose(combine_velocity([v, -v], 10.0), 0.0)

    def test_clamp_preserves_direction(self):
        v = np.array([30.0, 0.0, 0.0])
        out = combine_velocity([v], 10.0)
        assert np.allclose(out, [10.0, 0.0, 0.0])
        rng = np.random.default_rng(1)
        terms = [rng.uniform(-10, 10, 3) for _ in range(5)]
        out = combine_velocity(terms, 10.0)
        assert np.linalg.norm(out) <= 10.0 + 1e-12
        total = np.sum(terms, axis=0)
        if np.linalg.norm(total) > 10.0:
            assert np.allclose(out / np.linalg.norm(out), total / np.linalg.norm(total))


class TestPairProperties:
    def test_pairwise_antisymmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = uav(0, rng.uniform(-5, 5, 3))
            b = uav(1, rng.uniform(-5, 5, 3))
            assert np.allclose(separation_velocity(a, [b], P), -separation_velocity(b, [a], P))
            assert np.allclose(half_spring_repulsion(a, [b], P), -half_spring_repulsion(b, [a], P))

    def test_locality_outside_radius(self):
        me = uav(0, (0, 0, 0))
        base = [uav(1, (2, 0, 0))]
        far1 = base + [uav(2, (100, 0, 0))]
        far2 = base + [uav(2, (200, 50, 0))]
        for fn in (separation_velocity, cohesion_velocity, half_spring_repulsion):
            assert np.array_equal(fn(me, far1, P), fn(me, far2, P))


def test_repulsion_reduces_collisions_statistically():
    """10 UAVs converge on one point; half-spring must strictly reduce events."""
    from hgic.world import MotionLimits, SwarmWorld, detect_collisions, step_world
    from hgic.flocking import combine_velocity

    def run(seed, with_repulsion):
        rng = np.random.default_rng(seed)
        uavs = [
            UavState(id=i, position=rng.uniform(-25, 25, 3) + np.array([0, 0, 40.0]),
                     velocity=np.zeros(3))
            for i in range(10)
        ]
        w = SwarmWorld(uavs=uavs, limits=MotionLimits())
        goal = np.array([0.0, 0.0, 40.0])
        events = 0
        for _ in range(600):
            cmds = []
            for u in w.uavs:
                terms = [migration_velocity(u, goal, P)]
                if with_repulsion:
                    others = [o for o in w.uavs if o.id != u.id]
                    terms.append(half_spring_repulsion(u, others, P))
                cmds.append(combine_velocity(terms, w.limits.v_max))
            step_world(w, np.array(cmds))
            events += detect_collisions(w, w.limits.d_col)
        return events

    with_rep = sum(run(seed, True) for seed in range(20))
    without = sum(run(seed, False) for seed in range(20))
    assert with_rep < without
    assert without > 0
