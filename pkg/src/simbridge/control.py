"""Controller-side half of the bridge.

Active tasks produce desired joint accelerations (closed-form task PD),
which are double-integrated into position/velocity references and then
saturated against the controller-side bounds. The integration is servoed
on the controller's own reference state, not raw measurement; sensor
feedback enters through FSM completion criteria and demo logic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .actuation import ReferenceSample
from .model import ControlBounds

ControlOutput = dict[str, ReferenceSample]


@dataclass(frozen=True)
class JointReading:
    q: float
    qd: float
    tau: float


@dataclass(frozen=True)
class ObjectReading:
    z: float
    grasped: bool


@dataclass(frozen=True)
class SensorFrame:
    t: float
    joints: Mapping[str, JointReading]          # noisy/quantized per sensor spec
    truth_joints: Mapping[str, JointReading]    # exact sim state, debugging only
    objects: Mapping[str, ObjectReading] = field(default_factory=dict)
    gripper_force: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class PostureTask:
    targets: Mapping[str, float]       # joint -> rad
    stiffness: float = 30.0            # 1/s²
    damping_ratio: float = 1.0         # 1 = critical
    weight: float = 1.0

    def __post_init__(self):
        if self.stiffness <= 0:
            raise ValueError("stiffness must be > 0")
        if self.weight <= 0:
            raise ValueError("weight must be > 0")


def posture_accel(task: PostureTask, refs: Mapping[str, ReferenceSample]) -> dict[str, float]:
    """Desired acceleration per target joint, PD on the reference state."""
    kd = 2.0 * task.damping_ratio * math.sqrt(task.stiffness)
    out = {}
    for joint, target in task.targets.items():
        ref = refs.get(joint)
        if ref is None:
            raise KeyError(f"task targets unknown joint '{joint}'")
        out[joint] = task.stiffness * (target - ref.q_ref) - kd * ref.qd_ref
    return out


def double_integrate(current: ReferenceSample, accel: float, dt_ctrl: float) -> ReferenceSample:
    """Semi-implicit double integration, matching the physics convention."""
    qd = current.qd_ref + dt_ctrl * accel
    return ReferenceSample(q_ref=current.q_ref + dt_ctrl * qd, qd_ref=qd)


def clamp_to_bounds(out: ControlOutput, bounds: ControlBounds) -> ControlOutput:
    """Saturate references; outward velocity is zeroed at a position stop."""
    clamped = {}
    for joint, ref in out.items():
        b = bounds.joints[joint]
        qd = min(max(ref.qd_ref, -b.vel), b.vel)
        q = ref.q_ref
        if q <= b.pos[0]:
            q = b.pos[0]
            qd = max(qd, 0.0)
        elif q >= b.pos[1]:
            q = b.pos[1]
            qd = min(qd, 0.0)
        clamped[joint] = ReferenceSample(q_ref=q, qd_ref=qd)
    return clamped


class Controller:
    """Holds the reference state for the actuated joints and ticks at dt_ctrl.

    The velocity reference is clamped before the position update so the
    per-tick reference increment never exceeds bounds.vel * dt_ctrl.
    """

    def __init__(self, joints: list[str], bounds: ControlBounds, dt_ctrl: float,
                 initial: Mapping[str, float] | None = None):
        self.bounds = bounds
        self.dt_ctrl = dt_ctrl
        initial = initial or {}
        self.refs: dict[str, ReferenceSample] = {
            j: ReferenceSample(q_ref=float(initial.get(j, 0.0))) for j in joints
        }

    def tick(self, frame: SensorFrame, tasks: list[PostureTask]) -> ControlOutput:
        accel: dict[str, float] = {j: 0.0 for j in self.refs}
        weight: dict[str, float] = {j: 0.0 for j in self.refs}
        for task in tasks:
            for joint, a in posture_accel(task, self.refs).items():
                accel[joint] += task.weight * a
                weight[joint] += task.weight
        out: ControlOutput = {}
        for joint, ref in self.refs.items():
            a = accel[joint] / weight[joint] if weight[joint] > 0 else 0.0
            b = self.bounds.joints[joint]
            qd = ref.qd_ref + self.dt_ctrl * a
            qd = min(max(qd, -b.vel), b.vel)
            q = ref.q_ref + self.dt_ctrl * qd
            if q <= b.pos[0]:
                q = b.pos[0]
                qd = max(qd, 0.0)
            elif q >= b.pos[1]:
                q = b.pos[1]
                qd = min(qd, 0.0)
            out[joint] = ReferenceSample(q_ref=q, qd_ref=qd)
        self.refs = out
        return dict(out)

    def reset(self, posture: Mapping[str, float]):
        self.refs = {
            j: ReferenceSample(q_ref=float(posture.get(j, 0.0))) for j in self.refs
        }
