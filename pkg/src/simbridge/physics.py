"""Joint-space rigid-joint dynamics at a fixed timestep.

Each joint is an independent 1-DoF inertia with viscous damping,
Coulomb/stiction friction, a sin(q) gravity torque, hard position limits
and gear-scaled motor torque. Objects are 1-D vertical point masses with
table support and kinematic grasp attachment.

The per-joint inner loop is the hot path; a compiled Cython kernel is
used when available and a numpy fallback otherwise (see _fallback.py).
Set SIMBRIDGE_PURE=1 to force the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import PhysicsError
from .model import SceneModel, effective_inertia

if os.environ.get("SIMBRIDGE_PURE"):
    from . import _fallback as _kernel
    USING_COMPILED_KERNEL = False
else:
    try:
        from . import _kernels as _kernel  # type: ignore[no-redef]
        USING_COMPILED_KERNEL = True
    except ImportError:
        from . import _fallback as _kernel  # type: ignore[no-redef]
        USING_COMPILED_KERNEL = False

GRAVITY = 9.81          # m/s², object free fall
STICTION_V_EPS = 1e-3   # rad/s, velocity window for the stiction latch


@dataclass
class ObjectRuntime:
    z: float
    vz: float = 0.0
    grasped: bool = False
    anchor_joint: str | None = None
    anchor_q: float = 0.0
    grasp_z0: float = 0.0
    ext_force: float = 0.0
    ext_until_step: int = 0

    def copy(self) -> "ObjectRuntime":
        return replace(self)


@dataclass(frozen=True)
class JointView:
    """Read-only view of one joint's runtime state."""
    q: float
    qd: float
    last_applied: float
    ext_torque: float


class CompiledScene:
    """Scene parameters flattened into arrays, indexed by joint order."""

    def __init__(self, scene: SceneModel):
        self.scene = scene
        qualified = scene.qualified_joints()
        self.names = [name for name, _, _ in qualified]
        self.index = {name: i for i, name in enumerate(self.names)}
        n = len(self.names)

        def arr(fn):
            return np.array([fn(j) for _, j, _ in qualified], dtype=np.float64)

        self.inertia_eff = arr(effective_inertia)
        self.damping = arr(lambda j: j.damping)
        self.coulomb = arr(lambda j: j.coulomb_friction)
        self.stiction = arr(lambda j: j.stiction)
        self.gravity_amp = arr(lambda j: j.gravity_amp)
        self.gear = arr(lambda j: j.gear)
        self.torque_limit = arr(lambda j: j.torque_limit)
        self.pos_min = arr(lambda j: j.pos_limits[0])
        self.pos_max = arr(lambda j: j.pos_limits[1])

        self.actuator_kind = ["none"] * n
        self.default_kp = np.zeros(n)
        self.default_kd = np.zeros(n)
        for i, (name, _, entry) in enumerate(qualified):
            local = name.split("/", 1)[1]
            act = entry.desc.actuator_for(local)
            if act is not None:
                self.actuator_kind[i] = act.kind
                self.default_kp[i] = act.default_gains.kp
                self.default_kd[i] = act.default_gains.kd
        self.actuated = np.array([k != "none" for k in self.actuator_kind])

        self.default_posture = np.zeros(n)
        for i, (name, _, entry) in enumerate(qualified):
            local = name.split("/", 1)[1]
            self.default_posture[i] = entry.desc.default_posture.get(local, 0.0)

        self.objects = {o.name: o for o in scene.objects}

    @property
    def n_joints(self) -> int:
        return len(self.names)


class PhysicsState:
    """Single source of truth for the simulated world, advanced at dt_sim.

    Time is tracked as an integer substep count so that t is always an
    exact multiple of dt. Owned by exactly one stepping context; hand out
    copies (via .copy()) to everything else.
    """

    def __init__(self, compiled: CompiledScene, dt: float):
        n = compiled.n_joints
        self.compiled = compiled
        self.dt = dt
        self.step_count = 0
        self.q = compiled.default_posture.copy()
        self.qd = np.zeros(n)
        self.applied = np.zeros(n)
        self.ext = np.zeros(n)
        self.ext_until = np.zeros(n, dtype=np.int64)
        self.objects: dict[str, ObjectRuntime] = {
            name: ObjectRuntime(z=spec.rest_height)
            for name, spec in compiled.objects.items()
        }

    @property
    def t(self) -> float:
        return self.step_count * self.dt

    def joint(self, name: str) -> JointView:
        i = self.compiled.index[name]
        active = self.step_count < self.ext_until[i]
        return JointView(
            q=float(self.q[i]), qd=float(self.qd[i]),
            last_applied=float(self.applied[i]),
            ext_torque=float(self.ext[i]) if active else 0.0,
        )

    def copy(self) -> "PhysicsState":
        out = PhysicsState.__new__(PhysicsState)
        out.compiled = self.compiled
        out.dt = self.dt
        out.step_count = self.step_count
        out.q = self.q.copy()
        out.qd = self.qd.copy()
        out.applied = self.applied.copy()
        out.ext = self.ext.copy()
        out.ext_until = self.ext_until.copy()
        out.objects = {k: v.copy() for k, v in self.objects.items()}
        return out


def step(state: PhysicsState, commands: Mapping[str, float] | np.ndarray,
         dt: float | None = None) -> PhysicsState:
    """Advance one substep; pure, returns a new state.

    ``commands`` maps joint name to motor-side torque (or is an array in
    scene joint order). Motor torque is gear-scaled and clamped to the
    joint torque limit; dissipation and gravity torques are applied; the
    velocity update is symplectic with damping treated by a symmetric
    implicit factor.
    """
    compiled = state.compiled
    dt = state.dt if dt is None else dt
    if dt <= 0:
        raise PhysicsError(f"dt must be > 0, got {dt}")

    if isinstance(commands, np.ndarray):
        u_motor = commands
    else:
        u_motor = np.zeros(compiled.n_joints)
        for name, u in commands.items():
            i = compiled.index.get(name)
            if i is None:
                raise PhysicsError(f"command for unknown joint '{name}'")
            if compiled.actuator_kind[i] == "none":
                raise PhysicsError(f"command for passive joint '{name}'")
            u_motor[i] = u
    if not np.all(np.isfinite(u_motor)):
        bad = compiled.names[int(np.argmin(np.isfinite(u_motor)))]
        raise PhysicsError(f"non-finite command for joint '{bad}'")

    out = state.copy()
    active = out.step_count < out.ext_until
    ext = np.where(active, out.ext, 0.0)
    _kernel.step_joints(
        out.q, out.qd, out.applied, np.asarray(u_motor, dtype=np.float64), ext, dt,
        compiled.inertia_eff, compiled.damping, compiled.coulomb,
        compiled.stiction, compiled.gravity_amp, compiled.gear,
        compiled.torque_limit, compiled.pos_min, compiled.pos_max,
        STICTION_V_EPS,
    )
    out.step_count += 1
    expired = out.step_count >= out.ext_until
    out.ext[expired] = 0.0

    for name, obj in out.objects.items():
        spec = compiled.objects[name]
        if obj.grasped:
            q_anchor = out.q[compiled.index[obj.anchor_joint]]
            obj.z = max(spec.table_height, obj.grasp_z0 + (q_anchor - obj.anchor_q))
            obj.vz = 0.0
        else:
            f = obj.ext_force if state.step_count < obj.ext_until_step else 0.0
            obj.vz += dt * (-GRAVITY + f / spec.mass)
            obj.z += dt * obj.vz
            if obj.z <= spec.table_height:
                obj.z = spec.table_height
                obj.vz = 0.0
        if out.step_count >= obj.ext_until_step:
            obj.ext_force = 0.0
    return out


def apply_external(state: PhysicsState, target: str, magnitude: float,
                   duration: float) -> PhysicsState:
    """Set a perturbation (joint torque or object vertical force).

    Active for ceil(duration/dt) substeps, then auto-cleared. Repeated
    calls overwrite: the latest perturbation wins.
    """
    if not math.isfinite(magnitude):
        raise PhysicsError("perturbation magnitude must be finite")
    if duration <= 0:
        raise PhysicsError("perturbation duration must be > 0")
    steps = math.ceil(duration / state.dt)
    out = state.copy()
    i = state.compiled.index.get(target)
    if i is not None:
        out.ext[i] = magnitude
        out.ext_until[i] = out.step_count + steps
        return out
    obj = out.objects.get(target)
    if obj is not None:
        obj.ext_force = magnitude
        obj.ext_until_step = out.step_count + steps
        return out
    raise PhysicsError(f"unknown perturbation target '{target}'")


def energy(state: PhysicsState) -> float:
    """Total mechanical energy: joint kinetic + gravity potential + objects."""
    compiled = state.compiled
    e = float(np.sum(0.5 * compiled.inertia_eff * state.qd ** 2))
    e += float(np.sum(compiled.gravity_amp * (1.0 - np.cos(state.q))))
    for name, obj in state.objects.items():
        spec = compiled.objects[name]
        e += spec.mass * GRAVITY * obj.z + 0.5 * spec.mass * obj.vz ** 2
    return e


def reset(state: PhysicsState, posture: Mapping[str, float] | None = None) -> PhysicsState:
    """Fresh state at t=0: q := posture (default posture if omitted), qd=0."""
    compiled = state.compiled
    out = PhysicsState(compiled, state.dt)
    if posture is not None:
        for name, q in posture.items():
            i = compiled.index.get(name)
            if i is None:
                raise PhysicsError(f"posture names unknown joint '{name}'")
            if not (compiled.pos_min[i] <= q <= compiled.pos_max[i]):
                raise PhysicsError(f"posture for '{name}' outside pos_limits")
            out.q[i] = q
    return out
