"""Desk-scale grasping demonstration.

A 3-joint arm plus a 1-joint gripper over a table with a box. A linear
FSM drives the whole motion automatically: hold posture, move to a
pre-grasp pose, open the gripper, reach the box, close, lift. Grasping
is a kinematic attachment triggered by thresholds: once the gripper is
closed and the arm is within a joint-space tolerance of the reach pose,
the box is latched to the lift joint and tracks it until reset. No
collision checking exists, so arm/table interpenetration is possible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from .control import SensorFrame
from .physics import PhysicsState


@dataclass(frozen=True)
class GraspConfig:
    object: str
    lift_joint: str
    gripper_joint: str
    reach_targets: Mapping[str, float]   # arm joints -> reach pose (proximity proxy)
    aperture_close: float = 0.05         # rad, gripper counts as closed below this
    reach_tol: float = 0.05              # rad, joint-space proximity tolerance
    lift_height: float = 0.1             # m above the table for success
    clamp_force: float = 5.0             # N reported by the gripper force sensor


def grasp_condition(frame: SensorFrame, cfg: GraspConfig) -> bool:
    """Closed gripper AND arm within reach tolerance — no phantom grasps."""
    if frame.joints[cfg.gripper_joint].q > cfg.aperture_close:
        return False
    return all(abs(frame.joints[j].q - target) <= cfg.reach_tol
               for j, target in cfg.reach_targets.items())


def lift_success(frame: SensorFrame, cfg: GraspConfig, table_height: float) -> bool:
    obj = frame.objects[cfg.object]
    return obj.grasped and obj.z >= table_height + cfg.lift_height


class GraspLogic:
    """Scenario hook run inside controller ticks: latches the attachment."""

    def __init__(self, cfg: GraspConfig):
        self.cfg = cfg
        self.attached = False

    def reset(self):
        self.attached = False

    def gripper_forces(self) -> dict[str, float]:
        if self.attached:
            return {self.cfg.gripper_joint: self.cfg.clamp_force}
        return {}

    def update(self, state: PhysicsState, frame: SensorFrame) -> SensorFrame:
        if not self.attached and grasp_condition(frame, self.cfg):
            obj = state.objects[self.cfg.object]
            i = state.compiled.index[self.cfg.lift_joint]
            obj.grasped = True
            obj.anchor_joint = self.cfg.lift_joint
            obj.anchor_q = float(state.q[i])
            obj.grasp_z0 = obj.z
            self.attached = True
        elif self.attached and not state.objects[self.cfg.object].grasped:
            # physics was reset underneath us
            self.attached = False
        if not self.attached:
            return frame
        from .control import ObjectReading
        objects = {name: ObjectReading(z=o.z, grasped=o.grasped)
                   for name, o in state.objects.items()}
        return replace(frame, objects=objects,
                       gripper_force=self.gripper_forces())


# --- scenario construction --------------------------------------------------

TABLE_HEIGHT = 0.4
LIFT_HEIGHT = 0.1

REACH_TARGETS = {"arm/shoulder": 0.8, "arm/elbow": 1.0, "arm/lift": 0.4}


def grasp_scenario_document() -> dict:
    """The shipped scenarios/grasp.json, as a dict."""
    return {
        "name": "grasp",
        "sim": {
            "dt_sim": 0.001, "ctrl_divisor": 5, "realtime_factor": 0.0,
            "seed": 7, "interpolation": "linear",
        },
        "robots": [{
            "instance": "arm",
            "description": {
                "name": "desk-arm",
                "joints": [
                    {"name": "shoulder", "kind": "revolute", "inertia": 0.02,
                     "rotor_inertia": 5e-6, "gear": 30.0, "damping": 0.05,
                     "coulomb_friction": 0.005, "stiction": 0.01,
                     "gravity_amp": 0.1, "pos_limits": [-1.6, 1.6],
                     "vel_limit": 5.0, "torque_limit": 25.0},
                    {"name": "elbow", "kind": "revolute", "inertia": 0.012,
                     "rotor_inertia": 3e-6, "gear": 30.0, "damping": 0.04,
                     "coulomb_friction": 0.004, "stiction": 0.008,
                     "gravity_amp": 0.06, "pos_limits": [-1.6, 1.6],
                     "vel_limit": 5.0, "torque_limit": 20.0},
                    {"name": "lift", "kind": "prismatic", "inertia": 2.0,
                     "rotor_inertia": 0.0, "gear": 1.0, "damping": 8.0,
                     "coulomb_friction": 0.2, "stiction": 0.4,
                     "gravity_amp": 0.0, "pos_limits": [0.3, 0.9],
                     "vel_limit": 1.0, "torque_limit": 200.0},
                    {"name": "gripper", "kind": "revolute", "inertia": 0.004,
                     "rotor_inertia": 1e-6, "gear": 10.0, "damping": 0.02,
                     "coulomb_friction": 0.002, "stiction": 0.004,
                     "gravity_amp": 0.0, "pos_limits": [0.0, 1.0],
                     "vel_limit": 6.0, "torque_limit": 8.0},
                ],
                "actuators": [
                    {"joint": "shoulder", "kind": "pd_servo", "kp": 0.8, "kd": 0.08},
                    {"joint": "elbow", "kind": "pd_servo", "kp": 0.6, "kd": 0.06},
                    {"joint": "lift", "kind": "pd_servo", "kp": 600.0, "kd": 60.0},
                    {"joint": "gripper", "kind": "pd_servo", "kp": 1.2, "kd": 0.12},
                ],
                "sensors": [
                    {"name": "enc_shoulder", "kind": "encoder", "target": "shoulder"},
                    {"name": "enc_elbow", "kind": "encoder", "target": "elbow"},
                    {"name": "enc_lift", "kind": "encoder", "target": "lift"},
                    {"name": "enc_gripper", "kind": "encoder", "target": "gripper"},
                    {"name": "tq_shoulder", "kind": "joint_torque", "target": "shoulder"},
                    {"name": "imu", "kind": "imu_stub", "target": "shoulder"},
                    {"name": "grip_force", "kind": "gripper_force", "target": "gripper"},
                    {"name": "truth", "kind": "ground_truth", "target": "shoulder"},
                ],
                "default_posture": {"shoulder": 0.2, "elbow": 0.3,
                                    "lift": 0.6, "gripper": 0.8},
                "bounds": {
                    "shoulder": {"pos": [-1.5, 1.5], "vel": 4.0, "torque": 24.0},
                    "elbow": {"pos": [-1.5, 1.5], "vel": 4.0, "torque": 18.0},
                    "lift": {"pos": [0.32, 0.88], "vel": 0.8, "torque": 180.0},
                    "gripper": {"pos": [0.0, 0.95], "vel": 5.0, "torque": 7.0},
                },
            },
        }],
        "objects": [{"name": "box", "mass": 0.5,
                     "rest_height": TABLE_HEIGHT, "table_height": TABLE_HEIGHT}],
        "fsm": {
            "initial": "Initial",
            "states": [
                {"name": "Initial",
                 "tasks": [{"targets": {"arm/shoulder": 0.2, "arm/elbow": 0.3,
                                        "arm/lift": 0.6, "arm/gripper": 0.8},
                            "stiffness": 30.0}],
                 "criterion": {"kind": "timer", "seconds": 0.5},
                 "on_complete": "PreGrasp"},
                {"name": "PreGrasp",
                 "tasks": [{"targets": {"arm/shoulder": 0.6, "arm/elbow": 0.8,
                                        "arm/lift": 0.5},
                            "stiffness": 30.0}],
                 "criterion": {"kind": "error_below", "eps": 0.02, "hold": 0.2},
                 "on_complete": "OpenGripper"},
                {"name": "OpenGripper",
                 "tasks": [{"targets": {"arm/gripper": 0.9}, "stiffness": 40.0}],
                 "criterion": {"kind": "error_below", "eps": 0.02, "hold": 0.1},
                 "on_complete": "Reach"},
                {"name": "Reach",
                 "tasks": [{"targets": dict(REACH_TARGETS), "stiffness": 30.0}],
                 "criterion": {"kind": "error_below", "eps": 0.02, "hold": 0.2},
                 "on_complete": "CloseGripper"},
                {"name": "CloseGripper",
                 "tasks": [{"targets": {"arm/gripper": 0.0}, "stiffness": 40.0}],
                 "criterion": {"kind": "all_of", "criteria": [
                     {"kind": "gripper_closed", "joint": "arm/gripper",
                      "aperture_max": 0.05},
                     {"kind": "contact", "joint": "arm/gripper", "force_min": 1.0},
                 ]},
                 "on_complete": "Lift"},
                {"name": "Lift",
                 "tasks": [{"targets": {"arm/lift": 0.6}, "stiffness": 30.0}],
                 "criterion": {"kind": "object_height", "object": "box",
                               "z_min": TABLE_HEIGHT + LIFT_HEIGHT},
                 "on_complete": "Done"},
                {"name": "Done",
                 "tasks": [{"targets": {"arm/lift": 0.6}, "stiffness": 30.0}],
                 "criterion": {"kind": "timer", "seconds": 0.0},
                 "on_complete": None},
            ],
        },
        "grasp": {
            "object": "box", "lift_joint": "arm/lift",
            "gripper_joint": "arm/gripper",
            "reach_targets": dict(REACH_TARGETS),
            "aperture_close": 0.05, "reach_tol": 0.05,
            "lift_height": LIFT_HEIGHT, "clamp_force": 5.0,
        },
        "success_state": "Done",
        "commands": [],
    }


def build_grasp_scenario():
    """(SceneModel, Machine, SimConfig, GraspLogic, success_state,
    command_script) for the demo scenario."""
    from .scenario import load_scenario_dict
    return load_scenario_dict(grasp_scenario_document())
