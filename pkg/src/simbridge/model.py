"""Robot and scene descriptions.

Holds the sim-side model (joints, actuators, sensors) together with the
controller-side conservative bounds, plus parsing from the JSON document
format and multi-robot scene merging with "instance/joint" namespacing.

All types here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

from .errors import DescriptionError, MergeError

log = logging.getLogger(__name__)

NAME_SEPARATOR = "/"

JOINT_KINDS = ("revolute", "prismatic")
ACTUATOR_KINDS = ("direct_torque", "position", "velocity", "pd_servo", "none")
SENSOR_KINDS = ("encoder", "joint_torque", "imu_stub", "gripper_force", "ground_truth")


@dataclass(frozen=True)
class ServoGains:
    kp: float = 0.0  # N·m/rad, motor side
    kd: float = 0.0  # N·m·s/rad, motor side

    def validate(self, where: str) -> list[str]:
        problems = []
        if not (math.isfinite(self.kp) and self.kp >= 0):
            problems.append(f"{where}: kp must be finite and >= 0, got {self.kp}")
        if not (math.isfinite(self.kd) and self.kd >= 0):
            problems.append(f"{where}: kd must be finite and >= 0, got {self.kd}")
        return problems


@dataclass(frozen=True)
class JointSpec:
    name: str
    kind: str = "revolute"
    inertia: float = 0.01           # kg·m², link-side
    rotor_inertia: float = 0.0      # kg·m², motor side
    gear: float = 1.0               # motor→joint transmission ratio
    damping: float = 0.0            # N·m·s/rad
    coulomb_friction: float = 0.0   # N·m
    stiction: float = 0.0           # N·m, breakaway threshold
    gravity_amp: float = 0.0        # N·m, amplitude of the sin(q) gravity torque
    pos_limits: tuple[float, float] = (-math.pi, math.pi)
    vel_limit: float = 10.0         # rad/s
    torque_limit: float = 100.0     # N·m, joint side

    def validate(self) -> list[str]:
        p = []
        w = f"joint '{self.name}'"
        if not self.name:
            p.append("joint with empty name")
        if self.kind not in JOINT_KINDS:
            p.append(f"{w}: unknown kind '{self.kind}'")
        if not self.inertia > 0:
            p.append(f"{w}: inertia must be > 0")
        if self.rotor_inertia < 0:
            p.append(f"{w}: rotor_inertia must be >= 0")
        if not self.gear > 0:
            p.append(f"{w}: gear must be > 0")
        if self.damping < 0:
            p.append(f"{w}: damping must be >= 0")
        if self.coulomb_friction < 0:
            p.append(f"{w}: coulomb_friction must be >= 0")
        if self.stiction < self.coulomb_friction:
            p.append(f"{w}: stiction must be >= coulomb_friction")
        if self.gravity_amp < 0:
            p.append(f"{w}: gravity_amp must be >= 0")
        if not self.pos_limits[0] < self.pos_limits[1]:
            p.append(f"{w}: pos_limits must satisfy min < max")
        if not self.vel_limit > 0:
            p.append(f"{w}: vel_limit must be > 0")
        if not self.torque_limit > 0:
            p.append(f"{w}: torque_limit must be > 0")
        return p


@dataclass(frozen=True)
class ActuatorSpec:
    joint: str
    kind: str = "pd_servo"
    default_gains: ServoGains = field(default_factory=ServoGains)


@dataclass(frozen=True)
class SensorSpec:
    name: str
    kind: str
    target: str                 # joint or object name
    noise_std: float = 0.0      # same units as the reading
    quantization: float = 0.0   # 0 = off


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    mass: float                 # kg
    rest_height: float          # m
    table_height: float         # m


@dataclass(frozen=True)
class JointBounds:
    pos: tuple[float, float]
    vel: float
    torque: float


@dataclass(frozen=True)
class ControlBounds:
    joints: dict[str, JointBounds] = field(default_factory=dict)

    def __hash__(self):  # frozen dataclass with a dict field
        return hash(tuple(sorted(self.joints.items())))

    def for_joint(self, name: str) -> JointBounds:
        return self.joints[name]


@dataclass(frozen=True)
class RobotDescription:
    name: str
    joints: tuple[JointSpec, ...]
    actuators: tuple[ActuatorSpec, ...]
    sensors: tuple[SensorSpec, ...] = ()
    default_posture: dict[str, float] = field(default_factory=dict)

    def __hash__(self):
        return hash((self.name, self.joints, self.actuators, self.sensors))

    def joint(self, name: str) -> JointSpec:
        for j in self.joints:
            if j.name == name:
                return j
        raise KeyError(name)

    def actuator_for(self, joint: str) -> ActuatorSpec | None:
        for a in self.actuators:
            if a.joint == joint:
                return a
        return None

    def passive_joints(self) -> set[str]:
        out = set()
        for j in self.joints:
            a = self.actuator_for(j.name)
            if a is None or a.kind == "none":
                out.add(j.name)
        return out

    def validate(self, object_names: set[str] | None = None) -> list[str]:
        p = []
        names = [j.name for j in self.joints]
        if len(set(names)) != len(names):
            p.append(f"robot '{self.name}': duplicate joint names")
        for j in self.joints:
            p.extend(j.validate())
        seen_act = set()
        for a in self.actuators:
            if a.joint not in names:
                p.append(f"robot '{self.name}': actuator targets missing joint '{a.joint}'")
            if a.joint in seen_act:
                p.append(f"robot '{self.name}': more than one actuator on joint '{a.joint}'")
            seen_act.add(a.joint)
            if a.kind not in ACTUATOR_KINDS:
                p.append(f"robot '{self.name}': unknown actuator kind '{a.kind}'")
            p.extend(a.default_gains.validate(f"actuator on '{a.joint}'"))
        objs = object_names or set()
        for s in self.sensors:
            if s.kind not in SENSOR_KINDS:
                p.append(f"sensor '{s.name}': unknown kind '{s.kind}'")
            if s.target not in names and s.target not in objs:
                p.append(f"sensor '{s.name}': target '{s.target}' names no joint or object")
            if s.noise_std < 0:
                p.append(f"sensor '{s.name}': noise_std must be >= 0")
            if s.quantization < 0:
                p.append(f"sensor '{s.name}': quantization must be >= 0")
        for jn, q in self.default_posture.items():
            if jn not in names:
                p.append(f"default_posture names missing joint '{jn}'")
            else:
                lo, hi = self.joint(jn).pos_limits
                if not (lo <= q <= hi):
                    p.append(f"default_posture for '{jn}' outside pos_limits")
        return p


@dataclass(frozen=True)
class SceneEntry:
    instance: str
    desc: RobotDescription
    bounds: ControlBounds


@dataclass(frozen=True)
class SceneModel:
    entries: tuple[SceneEntry, ...]
    objects: tuple[ObjectSpec, ...] = ()

    def qualified_joints(self) -> list[tuple[str, JointSpec, SceneEntry]]:
        out = []
        for e in self.entries:
            for j in e.desc.joints:
                out.append((f"{e.instance}{NAME_SEPARATOR}{j.name}", j, e))
        return out

    def joint_names(self) -> list[str]:
        return [name for name, _, _ in self.qualified_joints()]


def effective_inertia(j: JointSpec) -> float:
    """Inertia seen at the joint: link inertia plus gear-reflected rotor inertia."""
    return j.inertia + j.gear * j.gear * j.rotor_inertia


def validate_bounds(desc: RobotDescription, bounds: ControlBounds) -> list[str]:
    """Check that controller bounds are contained in the sim limits.

    Containment is non-strict: bounds equal to the sim limit are accepted.
    Returns a list of problems, empty when everything is consistent.
    """
    problems = []
    passive = desc.passive_joints()
    for j in desc.joints:
        if j.name in passive:
            continue
        jb = bounds.joints.get(j.name)
        if jb is None:
            problems.append(f"unbounded joint '{j.name}'")
            continue
        if jb.pos[0] < j.pos_limits[0] or jb.pos[1] > j.pos_limits[1]:
            problems.append(f"joint '{j.name}': pos bound exceeds sim limit")
        if not jb.pos[0] < jb.pos[1]:
            problems.append(f"joint '{j.name}': pos bound min >= max")
        if jb.vel > j.vel_limit or jb.vel <= 0:
            problems.append(f"joint '{j.name}': vel bound exceeds sim limit")
        if jb.torque > j.torque_limit or jb.torque <= 0:
            problems.append(f"joint '{j.name}': torque bound exceeds sim limit")
    return problems


def merge_scene(
    entries: list[tuple[str, RobotDescription, ControlBounds]],
    objects: list[ObjectSpec] | None = None,
) -> SceneModel:
    """Merge robots into one scene, qualifying joints as "instance/joint"."""
    seen = set()
    merged = []
    for instance, desc, bounds in entries:
        if NAME_SEPARATOR in instance:
            raise MergeError(f"instance name '{instance}' may not contain '{NAME_SEPARATOR}'")
        if instance in seen:
            raise MergeError(f"duplicate instance name '{instance}'")
        seen.add(instance)
        problems = desc.validate({o.name for o in (objects or [])})
        problems += validate_bounds(desc, bounds)
        if problems:
            raise DescriptionError([f"instance '{instance}': {p}" for p in problems])
        merged.append(SceneEntry(instance=instance, desc=desc, bounds=bounds))
    scene = SceneModel(entries=tuple(merged), objects=tuple(objects or []))
    names = scene.joint_names()
    if len(set(names)) != len(names):
        raise MergeError("qualified joint names collide after merging")
    return scene


# --- JSON document format -------------------------------------------------

_DOC_KEYS = {
    "name", "joints", "actuators", "sensors", "default_posture",
    "bounds", "objects", "collision_pairs",
}
_JOINT_KEYS = {
    "name", "kind", "inertia", "rotor_inertia", "gear", "damping",
    "coulomb_friction", "stiction", "gravity_amp", "pos_limits",
    "vel_limit", "torque_limit",
}
_ACTUATOR_KEYS = {"joint", "kind", "kp", "kd"}
_SENSOR_KEYS = {"name", "kind", "target", "noise_std", "quantization"}


def _check_keys(obj: dict, allowed: set[str], where: str, strict: bool, problems: list[str]):
    unknown = set(obj) - allowed
    if not unknown:
        return
    msg = f"{where}: unknown keys {sorted(unknown)}"
    if strict:
        problems.append(msg)
    else:
        log.warning(msg)


def parse_description(text: str, strict: bool = True) -> tuple[RobotDescription, ControlBounds, list[ObjectSpec]]:
    """Parse the JSON robot document into (description, bounds, objects).

    Syntax errors are annotated with line/column; semantic problems are
    collected and raised together as a DescriptionError.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DescriptionError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise DescriptionError("document root must be a JSON object")
    return parse_description_dict(doc, strict=strict)


def parse_description_dict(doc: dict, strict: bool = True) -> tuple[RobotDescription, ControlBounds, list[ObjectSpec]]:
    problems: list[str] = []
    _check_keys(doc, _DOC_KEYS, "document", strict, problems)
    if "collision_pairs" in doc:
        # Accepted for compatibility; no collision engine exists.
        log.debug("collision_pairs present: parsed and ignored")

    name = doc.get("name")
    if not isinstance(name, str) or not name:
        problems.append("missing or empty 'name'")
        name = name or "unnamed"

    joints = []
    for i, jd in enumerate(doc.get("joints", [])):
        _check_keys(jd, _JOINT_KEYS, f"joints[{i}]", strict, problems)
        try:
            joints.append(JointSpec(
                name=jd["name"],
                kind=jd.get("kind", "revolute"),
                inertia=float(jd.get("inertia", 0.01)),
                rotor_inertia=float(jd.get("rotor_inertia", 0.0)),
                gear=float(jd.get("gear", 1.0)),
                damping=float(jd.get("damping", 0.0)),
                coulomb_friction=float(jd.get("coulomb_friction", 0.0)),
                stiction=float(jd.get("stiction", 0.0)),
                gravity_amp=float(jd.get("gravity_amp", 0.0)),
                pos_limits=tuple(float(x) for x in jd.get("pos_limits", (-math.pi, math.pi))),
                vel_limit=float(jd.get("vel_limit", 10.0)),
                torque_limit=float(jd.get("torque_limit", 100.0)),
            ))
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"joints[{i}]: {e!r}")

    actuators = []
    for i, ad in enumerate(doc.get("actuators", [])):
        _check_keys(ad, _ACTUATOR_KEYS, f"actuators[{i}]", strict, problems)
        try:
            actuators.append(ActuatorSpec(
                joint=ad["joint"],
                kind=ad.get("kind", "pd_servo"),
                default_gains=ServoGains(kp=float(ad.get("kp", 0.0)), kd=float(ad.get("kd", 0.0))),
            ))
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"actuators[{i}]: {e!r}")

    sensors = []
    for i, sd in enumerate(doc.get("sensors", [])):
        _check_keys(sd, _SENSOR_KEYS, f"sensors[{i}]", strict, problems)
        try:
            sensors.append(SensorSpec(
                name=sd["name"],
                kind=sd["kind"],
                target=sd["target"],
                noise_std=float(sd.get("noise_std", 0.0)),
                quantization=float(sd.get("quantization", 0.0)),
            ))
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"sensors[{i}]: {e!r}")

    posture = {k: float(v) for k, v in doc.get("default_posture", {}).items()}

    bounds_joints = {}
    for jn, bd in doc.get("bounds", {}).items():
        try:
            bounds_joints[jn] = JointBounds(
                pos=tuple(float(x) for x in bd["pos"]),
                vel=float(bd["vel"]),
                torque=float(bd["torque"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"bounds['{jn}']: {e!r}")

    objects = []
    for i, od in enumerate(doc.get("objects", [])):
        try:
            objects.append(ObjectSpec(
                name=od["name"],
                mass=float(od["mass"]),
                rest_height=float(od["rest_height"]),
                table_height=float(od["table_height"]),
            ))
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"objects[{i}]: {e!r}")

    desc = RobotDescription(
        name=name,
        joints=tuple(joints),
        actuators=tuple(actuators),
        sensors=tuple(sensors),
        default_posture=posture,
    )
    bounds = ControlBounds(joints=bounds_joints)
    problems += desc.validate({o.name for o in objects})
    problems += validate_bounds(desc, bounds)
    if problems:
        raise DescriptionError(problems)
    return desc, bounds, objects


def serialize_description(desc: RobotDescription, bounds: ControlBounds,
                          objects: list[ObjectSpec] | None = None) -> dict:
    """Inverse of parse_description_dict (round-trips exactly)."""
    doc = {
        "name": desc.name,
        "joints": [
            {
                "name": j.name, "kind": j.kind, "inertia": j.inertia,
                "rotor_inertia": j.rotor_inertia, "gear": j.gear,
                "damping": j.damping, "coulomb_friction": j.coulomb_friction,
                "stiction": j.stiction, "gravity_amp": j.gravity_amp,
                "pos_limits": list(j.pos_limits), "vel_limit": j.vel_limit,
                "torque_limit": j.torque_limit,
            }
            for j in desc.joints
        ],
        "actuators": [
            {"joint": a.joint, "kind": a.kind,
             "kp": a.default_gains.kp, "kd": a.default_gains.kd}
            for a in desc.actuators
        ],
        "sensors": [
            {"name": s.name, "kind": s.kind, "target": s.target,
             "noise_std": s.noise_std, "quantization": s.quantization}
            for s in desc.sensors
        ],
        "default_posture": dict(desc.default_posture),
        "bounds": {
            jn: {"pos": list(b.pos), "vel": b.vel, "torque": b.torque}
            for jn, b in bounds.joints.items()
        },
    }
    if objects:
        doc["objects"] = [
            {"name": o.name, "mass": o.mass, "rest_height": o.rest_height,
             "table_height": o.table_height}
            for o in objects
        ]
    return doc


def qualify_bounds(instance: str, bounds: ControlBounds) -> ControlBounds:
    return ControlBounds(joints={
        f"{instance}{NAME_SEPARATOR}{jn}": b for jn, b in bounds.joints.items()
    })


def scene_bounds(scene: SceneModel) -> ControlBounds:
    """All entries' bounds under their fully-qualified joint names."""
    joints = {}
    for e in scene.entries:
        joints.update(qualify_bounds(e.instance, e.bounds).joints)
    return ControlBounds(joints=joints)
