import math

import numpy as np
import pytest

from conftest import one_joint_state
from simbridge import physics
from simbridge.errors import PhysicsError
from simbridge.model import ObjectSpec


class TestStep:
    def test_equilibrium_only_time_advances(self):
        s0 = one_joint_state()
        s1 = physics.step(s0, {})
        assert s1.t == pytest.approx(0.001)
        assert s1.q[0] == 0.0 and s1.qd[0] == 0.0
        assert s0.t == 0.0  # step is pure

    def test_pure_damping_matches_exponential(self):
        # closed form qd(t) = qd0 * exp(-(d/I) t)
        s = one_joint_state(inertia=1.0, damping=5.0)
        s.qd[0] = 1.0
        for _ in range(1000):
            s = physics.step(s, {})
        exact = math.exp(-5.0)
        assert abs(s.qd[0] - exact) / exact < 0.01

    def test_sub_stiction_torque_holds_still(self):
        s = one_joint_state(stiction=1.0, coulomb_friction=0.5)
        for _ in range(1000):
            s = physics.step(s, {"a/j1": 0.5})
            assert s.qd[0] == 0.0
        assert s.q[0] == 0.0

    def test_above_stiction_breaks_away(self):
        s = one_joint_state(stiction=1.0, coulomb_friction=0.5)
        s = physics.step(s, {"a/j1": 1.5})
        assert s.qd[0] > 0.0

    def test_gear_scales_motor_torque(self):
        s = one_joint_state(gear=10.0)
        s = physics.step(s, {"a/j1": 1.0})
        assert s.applied[0] == 10.0
        assert s.qd[0] == pytest.approx(0.001 * 10.0)

    def test_torque_clamped_joint_side(self):
        s = one_joint_state(gear=10.0, torque_limit=5.0)
        s = physics.step(s, {"a/j1": 100.0})
        assert s.applied[0] == 5.0

    def test_position_limits_enforced_with_velocity_zeroed(self):
        s = one_joint_state(pos_limits=(-0.1, 0.1))
        s.q[0] = 0.09
        s.qd[0] = 50.0
        s = physics.step(s, {})
        assert s.q[0] == 0.1
        assert s.qd[0] == 0.0

    def test_nonfinite_command_rejected_with_name(self):
        s = one_joint_state()
        with pytest.raises(PhysicsError, match="a/j1"):
            physics.step(s, {"a/j1": float("nan")})

    def test_command_for_unknown_joint_rejected(self):
        s = one_joint_state()
        with pytest.raises(PhysicsError, match="nope"):
            physics.step(s, {"nope": 0.0})

    def test_determinism_bit_identical(self):
        def run():
            s = one_joint_state(damping=0.3, gravity_amp=1.2, coulomb_friction=0.05,
                                stiction=0.1)
            s.q[0] = 0.7
            for i in range(500):
                s = physics.step(s, {"a/j1": 0.1 * math.sin(i * 0.01)})
            return s.q[0], s.qd[0]
        assert run() == run()

    @pytest.mark.parametrize("seed", range(100))
    def test_limits_never_violated_random_scenes(self, seed):
        rng = np.random.default_rng(seed)
        lo, hi = sorted(rng.uniform(-2, 2, 2))
        if hi - lo < 0.01:
            hi = lo + 0.01
        s = one_joint_state(
            inertia=float(rng.uniform(0.005, 2.0)),
            damping=float(rng.uniform(0, 2)),
            coulomb_friction=float(rng.uniform(0, 0.2)),
            stiction=float(rng.uniform(0.2, 0.5)),
            gravity_amp=float(rng.uniform(0, 3)),
            gear=float(rng.uniform(0.5, 50)),
            pos_limits=(float(lo), float(hi)),
        )
        s.q[0] = float(rng.uniform(lo, hi))
        for _ in range(300):
            s = physics.step(s, {"a/j1": float(rng.uniform(-20, 20))})
            assert lo <= s.q[0] <= hi


class TestDissipation:
    @pytest.mark.parametrize("seed", range(10))
    def test_energy_non_increasing_without_drive(self, seed):
        rng = np.random.default_rng(seed)
        s = one_joint_state(
            inertia=float(rng.uniform(0.01, 2.0)),
            damping=float(rng.uniform(0, 3)),
            coulomb_friction=float(rng.uniform(0, 0.3)),
            stiction=float(rng.uniform(0.3, 0.6)),
        )
        s.qd[0] = float(rng.uniform(-3, 3))
        e = physics.energy(s)
        for _ in range(500):
            s = physics.step(s, {})
            e2 = physics.energy(s)
            assert e2 <= e + 1e-9
            e = e2


class TestExternal:
    def test_zero_torque_changes_nothing(self):
        s0 = one_joint_state()
        s0 = physics.apply_external(s0, "a/j1", 0.0, 0.1)
        s1 = physics.step(s0, {})
        assert s1.q[0] == 0.0 and s1.qd[0] == 0.0

    def test_impulse_integrates_to_velocity_gain(self):
        # impulse = torque * duration = 0.2 N·m·s on unit inertia
        s = one_joint_state()
        s = physics.apply_external(s, "a/j1", 2.0, 0.1)
        for _ in range(200):
            s = physics.step(s, {})
        assert s.qd[0] == pytest.approx(0.2, rel=1e-3)

    def test_perturbation_expires(self):
        s = one_joint_state(damping=0.0)
        s = physics.apply_external(s, "a/j1", 1.0, 0.01)
        for _ in range(10):
            s = physics.step(s, {})
        qd_after = s.qd[0]
        s = physics.step(s, {})
        assert s.qd[0] == qd_after

    def test_latest_perturbation_wins(self):
        s = one_joint_state()
        s = physics.apply_external(s, "a/j1", 5.0, 1.0)
        s = physics.apply_external(s, "a/j1", 0.0, 1.0)
        s = physics.step(s, {})
        assert s.qd[0] == 0.0

    def test_unknown_target_rejected(self):
        s = one_joint_state()
        with pytest.raises(PhysicsError, match="x/j9"):
            physics.apply_external(s, "x/j9", 1.0, 0.1)


class TestEnergy:
    def test_kinetic_only(self):
        s = one_joint_state(inertia=0.5)
        s.qd[0] = 2.0
        assert physics.energy(s) == pytest.approx(1.0)

    def test_baseline_with_object_at_rest(self):
        box = ObjectSpec(name="box", mass=2.0, rest_height=0.0, table_height=0.0)
        s = one_joint_state(objects=[box])
        assert physics.energy(s) == pytest.approx(0.0)

    def test_pendulum_conservation(self):
        # undamped, frictionless, unactuated; drift < 1e-4 relative over 1 s
        s = one_joint_state(inertia=1.0, gravity_amp=0.1)
        s.q[0] = 0.5
        e0 = physics.energy(s)
        for _ in range(1000):
            s = physics.step(s, {})
        assert abs(physics.energy(s) - e0) / e0 < 1e-4


class TestObjects:
    def _state_with_box(self, rest=0.8, table=0.4):
        box = ObjectSpec(name="box", mass=0.5, rest_height=rest, table_height=table)
        return one_joint_state(objects=[box])

    def test_free_fall_onto_table(self):
        s = self._state_with_box(rest=0.8, table=0.4)
        for _ in range(1000):
            s = physics.step(s, {})
        assert s.objects["box"].z == pytest.approx(0.4)
        assert s.objects["box"].vz == 0.0

    def test_grasped_object_tracks_anchor_joint(self):
        s = self._state_with_box(rest=0.4, table=0.4)
        obj = s.objects["box"]
        obj.grasped = True
        obj.anchor_joint = "a/j1"
        obj.anchor_q = 0.0
        obj.grasp_z0 = 0.4
        s.qd[0] = 1.0
        s = physics.step(s, {})
        assert s.objects["box"].z == pytest.approx(0.4 + s.q[0])

    def test_vertical_force_perturbation(self):
        s = self._state_with_box(rest=0.4, table=0.4)
        # push up harder than gravity
        s = physics.apply_external(s, "box", 0.5 * 9.81 * 3, 0.2)
        for _ in range(200):
            s = physics.step(s, {})
        assert s.objects["box"].z > 0.4


class TestReset:
    def test_reset_restores_baseline_energy(self):
        s = one_joint_state(gravity_amp=1.0)
        s.q[0] = 0.9
        s.qd[0] = 2.0
        s2 = physics.reset(s, {"a/j1": 0.0})
        assert physics.energy(s2) == pytest.approx(0.0)
        assert s2.t == 0.0

    def test_out_of_limit_posture_rejected(self):
        s = one_joint_state(pos_limits=(-1.0, 1.0))
        with pytest.raises(PhysicsError, match="pos_limits"):
            physics.reset(s, {"a/j1": 1.5})

    def test_reset_idempotent(self):
        s = one_joint_state()
        s.q[0] = 0.3
        once = physics.reset(s, {"a/j1": 0.1})
        twice = physics.reset(once, {"a/j1": 0.1})
        assert once.q[0] == twice.q[0]
        assert once.t == twice.t == 0.0
