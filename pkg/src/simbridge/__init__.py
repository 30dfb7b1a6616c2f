"""simbridge: a dual-rate controller/simulator bridge.

Fixed-timestep joint-space physics driven by PD servo actuators, a
lower-rate FSM controller with references interpolated up to the
simulation rate, a typed datastore, multi-robot scene merging, and a
WebSocket command/telemetry service for live operator steering.
"""

from .actuation import RefInterpolator, ReferenceSample, command_for, interpolate, pd_torque
from .bridge import Command, RunReport, SimBridge, SimConfig, Snapshot
from .control import Controller, PostureTask, SensorFrame
from .datastore import Datastore
from .fsm import Criterion, FsmStatus, Machine, StateDef, fsm_step, validate_machine
from .model import (ControlBounds, JointSpec, RobotDescription, SceneModel,
                    ServoGains, effective_inertia, merge_scene,
                    parse_description, validate_bounds)
from .physics import USING_COMPILED_KERNEL, PhysicsState, apply_external, energy, reset, step

__version__ = "0.1.0"

__all__ = [
    "Command", "ControlBounds", "Controller", "Criterion", "Datastore",
    "FsmStatus", "JointSpec", "Machine", "PhysicsState", "PostureTask",
    "RefInterpolator", "ReferenceSample", "RobotDescription", "RunReport",
    "SceneModel", "SensorFrame", "ServoGains", "SimBridge", "SimConfig",
    "Snapshot", "StateDef", "USING_COMPILED_KERNEL", "apply_external",
    "command_for", "effective_inertia", "energy", "fsm_step", "interpolate",
    "merge_scene", "parse_description", "pd_torque", "reset", "step",
    "validate_bounds", "validate_machine",
]
