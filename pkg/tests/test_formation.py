import itertools
import math

import numpy as np
import pytest

from hgic.assignment import assign_slots, assignment_cost
from hgic.formation import (
    EPS_COMPLETE,
    HOLD_TICKS,
    THETA_V,
    FormationKind,
    FormationSpec,
    formation_velocity,
    generate_slots,
    switch_formation,
)
from hgic.world import MotionLimits, SwarmWorld, UavState


def spec(kind, count, scale=10.0, heading=0.0, center=(0, 0, 30)):
    return FormationSpec(kind=kind, center=np.asarray(center, dtype=float),
                         heading=heading, scale=scale, count=count)


class TestGenerateSlots:
    def test_circle_symmetry(self):
        slots = generate_slots(spec("circle", 4, scale=10.0))
        center = np.array([0.0, 0.0, 30.0])
        for s in slots:
            assert np.linalg.norm(s - center) == pytest.approx(10.0, abs=1e-9)
        angles = [math.atan2(s[1], s[0]) % (2 * math.pi) for s in slots]
        assert angles == pytest.approx([0.0, math.pi / 2, math.pi, 3 * math.pi / 2], abs=1e-9)

    def test_circle_equal_angular_gaps(self):
        slots = generate_slots(spec("circle", 9))
        center = np.array([0.0, 0.0, 30.0])
        angles = sorted(math.atan2(s[1] - center[1], s[0] - center[0]) for s in slots)
        gaps = np.diff(angles + [angles[0] + 2 * math.pi])
        assert np.allclose(gaps, 2 * math.pi / 9, atol=1e-9)

    def test_line_three(self):
        slots = generate_slots(spec("line", 3, scale=4.0, heading=0.0))
        assert np.allclose(slots[1], [0, 0, 30])
        assert np.allclose(slots[0], [0, -4, 30])
        assert np.allclose(slots[2], [0, 4, 30])

    def test_v_matches_trig_oracle(self):
        n, scale = 5, 3.0
        slots = generate_slots(spec("v", n, scale=scale, heading=0.0, center=(0, 0, 30)))
        # Independent trig oracle: wings trail the apex at +-THETA_V off
        # the backward axis, ranks 1..2 per wing, alternating left first.
        theta = THETA_V
        expect = [np.array([0.0, 0.0, 30.0])]
        for i in range(1, n):
            rank = (i + 1) // 2
            sign = 1.0 if i % 2 == 1 else -1.0
            a = math.pi - sign * theta
            expect.append(
                np.array([rank * scale * math.cos(a), sign * rank * scale * math.sin(sign * a), 30.0])
            )
        for got, want in zip(slots, expect):
            assert got == pytest.approx(want, abs=1e-9)

    def test_count_one_and_errors(self):
        assert len(generate_slots(spec("v", 1))) == 1
        with pytest.raises(ValueError):
            spec("circle", 0)
        with pytest.raises(ValueError):
            FormationSpec(kind="circle", center=np.zeros(3), scale=0.0, count=3)


class TestAssignSlots:
    def test_identity_when_on_slots(self):
        pts = np.array([[0.0, 0, 0], [5, 0, 0], [0, 5, 0]])
        assert assign_slots(pts, pts.copy()) == [0, 1, 2]

    def test_two_crossed_uavs_uncross(self):
        positions = np.array([[0.0, 0, 0], [10.0, 0, 0]])
        slots = np.array([[10.0, 1, 0], [0.0, 1, 0]])
        assert assign_slots(positions, slots) == [1, 0]

    def test_n6_matches_exhaustive_minimum(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            pts = rng.uniform(-10, 10, (6, 3))
            slots = rng.uniform(-10, 10, (6, 3))
            got = assign_slots(pts, slots)
            best = min(
                (assignment_cost(pts, slots, list(p)) for p in itertools.permutations(range(6)))
            )
            assert assignment_cost(pts, slots, got) == pytest.approx(best, rel=1e-12)

    def test_lexicographic_tie_break(self):
        # Two agents equidistant from two slots: every assignment costs the
        # same, so the lexicographically smallest permutation must win.
        pts = np.array([[0.0, 1.0, 0], [0.0, -1.0, 0]])
        slots = np.array([[1.0, 0.0, 0], [-1.0, 0.0, 0]])
        assert assign_slots(pts, slots) == [0, 1]

    def test_errors(self):
        with pytest.raises(ValueError, match="slots"):
            assign_slots(np.zeros((2, 3)), np.zeros((3, 3)))
        with pytest.raises(ValueError, match="capped"):
            assign_slots(np.zeros((65, 3)), np.zeros((65, 3)))

    def test_permutation_and_cost_bound(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-20, 20, (12, 3))
        slots = rng.uniform(-20, 20, (12, 3))
        perm = assign_slots(pts, slots)
        assert sorted(perm) == list(range(12))
        assert assignment_cost(pts, slots, perm) <= assignment_cost(pts, slots, list(range(12)))

    def test_rigid_motion_equivariance(self):
        rng = np.random.default_rng(11)
        pts = rng.uniform(-10, 10, (7, 3))
        slots = rng.uniform(-10, 10, (7, 3))
        base = assign_slots(pts, slots)
        angle = 0.7
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
        shift = np.array([3.0, -8.0, 2.0])
        assert assign_slots(pts @ rot.T + shift, slots @ rot.T + shift) == base


class TestFormationVelocity:
    def test_on_slot(self):
        u = UavState(id=0, position=np.array([1.0, 2, 3]), velocity=np.zeros(3))
        assert np.array_equal(formation_velocity(u, np.array([1.0, 2, 3])), np.zeros(3))

    def test_proportional(self):
        u = UavState(id=0, position=np.array([2.0, 0, 0]), velocity=np.zeros(3))
        out = formation_velocity(u, np.zeros(3), k_f=1.5)
        assert np.allclose(out, [-3.0, 0, 0])

    def test_collinear_with_offset(self):
        rng = np.random.default_rng(3)
        u = UavState(id=0, position=rng.uniform(-5, 5, 3), velocity=np.zeros(3))
        slot = rng.uniform(-5, 5, 3)
        out = formation_velocity(u, slot)
        direction = slot - u.position
        cross = np.cross(out, direction)
        assert np.allclose(cross, 0.0, atol=1e-9)
        assert out @ direction > 0


class TestSwitchFormation:
    def make_world(self, slots):
        uavs = [
            UavState(id=i, position=s.copy(), velocity=np.zeros(3)) for i, s in enumerate(slots)
        ]
        return SwarmWorld(uavs=uavs, limits=MotionLimits())

    def test_identity_switch_completes_within_hysteresis(self):
        sp = spec("circle", 6)
        slots = generate_slots(sp)
        w = self.make_world(slots)
        plan = switch_formation(w, [u.id for u in w.uavs], sp)
        from hgic.formation import group_spacing_error

        for _ in range(HOLD_TICKS):
            assert not plan.complete
            err = group_spacing_error(w, plan)
            assert err < EPS_COMPLETE
            w.tick += 1
            plan.update(err, w.tick)
        assert plan.complete

    def test_switch_reassigns_from_current_positions(self):
        sp = spec("circle", 6)
        w = self.make_world(generate_slots(sp))
        to = spec("v", 6, scale=3.0)
        plan = switch_formation(w, [u.id for u in w.uavs], to)
        assert sorted(plan.assignment) == list(range(6))
        assert plan.spec.kind is FormationKind.V
        for u in w.uavs:
            assert u.slot_index is not None

    def test_size_mismatch(self):
        w = self.make_world(generate_slots(spec("circle", 4)))
        with pytest.raises(ValueError):
            switch_formation(w, [u.id for u in w.uavs], spec("v", 9))
