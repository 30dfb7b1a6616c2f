"""The main loop: physics substeps, controller ticks, reference
interpolation, sensor sampling, operator command queue and wall-clock
pacing.

One loop context owns all mutable state. ``enqueue`` and ``snapshot``
are the only cross-thread entry points: enqueue goes through a FIFO
queue, snapshot returns deep immutable copies. Commands take effect at
substep boundaries only, which keeps the step function deterministic:
with a fixed seed and a fixed timestamped command script the trajectory
is reproducible bit-exactly (pacing affects wall time only).
"""

from __future__ import annotations

import json
import math
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import IO, Mapping

import numpy as np

from . import physics
from .actuation import ACTUATOR_KIND_CODES, commands_array, interpolate_arrays
from .control import Controller, JointReading, ObjectReading, PostureTask, SensorFrame
from .datastore import Datastore, camera_stub_frame
from .errors import CommandError
from .fsm import Machine, fsm_step, initial_status, request_transition, validate_machine
from .model import SceneModel, ServoGains, scene_bounds
from .physics import CompiledScene, PhysicsState


@dataclass(frozen=True)
class SimConfig:
    dt_sim: float = 0.001
    ctrl_divisor: int = 5
    realtime_factor: float = 0.0      # 0 = unlimited (no pacing)
    paused: bool = False
    rng_seed: int = 0
    interpolation: str = "linear"     # or "hold"
    operator_stiffness: float = 30.0  # for SetPostureTarget overlay tasks

    @property
    def dt_ctrl(self) -> float:
        return self.dt_sim * self.ctrl_divisor

    def validate(self) -> list[str]:
        p = []
        if self.dt_sim <= 0:
            p.append("dt_sim must be > 0")
        if self.ctrl_divisor < 1:
            p.append("ctrl_divisor must be >= 1")
        if self.realtime_factor < 0:
            p.append("realtime_factor must be >= 0")
        if self.interpolation not in ("linear", "hold"):
            p.append(f"unknown interpolation '{self.interpolation}'")
        return p


# --- Operator commands ------------------------------------------------------

@dataclass(frozen=True)
class ApplyPerturbation:
    target: str            # joint or object
    magnitude: float       # N·m (joint) or N (object, vertical)
    duration: float        # s


@dataclass(frozen=True)
class SetGains:
    joint: str
    kp: float
    kd: float


@dataclass(frozen=True)
class SetSpeed:
    factor: float          # > 0, or 0 for unlimited


@dataclass(frozen=True)
class Pause:
    paused: bool = True


@dataclass(frozen=True)
class StepOnce:
    substeps: int = 1


@dataclass(frozen=True)
class Transition:
    state: str


@dataclass(frozen=True)
class SetPostureTarget:
    joint: str
    position: float


@dataclass(frozen=True)
class ResetScenario:
    pass


Command = (ApplyPerturbation | SetGains | SetSpeed | Pause | StepOnce
           | Transition | SetPostureTarget | ResetScenario)


@dataclass(frozen=True)
class Snapshot:
    t: float
    step_count: int
    joints: dict[str, dict[str, float]]   # q, qd, tau, q_ref, qd_ref
    fsm_state: str
    fsm_elapsed: float
    fsm_terminal: bool
    objects: dict[str, dict]              # z, grasped
    gains: dict[str, dict[str, float]]    # kp, kd
    speed: float
    paused: bool
    tick_count: int
    max_overrun: float


@dataclass
class RunReport:
    substeps: int = 0
    ticks: int = 0
    final_t: float = 0.0
    dt_sim: float = 0.001
    ctrl_divisor: int = 5
    fsm_state: str = ""
    terminal: bool = False
    success: bool = False
    max_overrun: float = 0.0
    wall_time: float = 0.0
    objects: dict = field(default_factory=dict)

    @property
    def pd_hz(self) -> float:
        return 1.0 / self.dt_sim

    @property
    def ctrl_hz(self) -> float:
        return 1.0 / (self.dt_sim * self.ctrl_divisor)

    def to_dict(self) -> dict:
        return {
            "substeps": self.substeps, "ticks": self.ticks,
            "final_t": self.final_t, "dt_sim": self.dt_sim,
            "ctrl_divisor": self.ctrl_divisor,
            "pd_hz": self.pd_hz, "ctrl_hz": self.ctrl_hz,
            "fsm_state": self.fsm_state, "terminal": self.terminal,
            "success": self.success, "max_overrun": self.max_overrun,
            "wall_time": self.wall_time, "objects": self.objects,
        }


def sample_sensors(state: PhysicsState, rng: np.random.Generator,
                   gripper_forces: Mapping[str, float] | None = None) -> SensorFrame:
    """Build a SensorFrame from the latest completed substep.

    Encoders add gaussian noise and floor-quantize to the configured step;
    torque sensors read the last applied joint torque plus noise; ground
    truth is copied exactly (debugging channel).
    """
    compiled = state.compiled
    joints: dict[str, JointReading] = {}
    truth: dict[str, JointReading] = {}
    sensor_map = _sensor_map(compiled)
    for i, name in enumerate(compiled.names):
        q, qd, tau = float(state.q[i]), float(state.qd[i]), float(state.applied[i])
        truth[name] = JointReading(q=q, qd=qd, tau=tau)
        q_meas, qd_meas, tau_meas = q, qd, tau
        enc = sensor_map.get(("encoder", name))
        if enc is not None:
            if enc.noise_std > 0:
                q_meas += enc.noise_std * rng.standard_normal()
            if enc.quantization > 0:
                q_meas = math.floor(q_meas / enc.quantization) * enc.quantization
        ts = sensor_map.get(("joint_torque", name))
        if ts is not None and ts.noise_std > 0:
            tau_meas += ts.noise_std * rng.standard_normal()
        joints[name] = JointReading(q=q_meas, qd=qd_meas, tau=tau_meas)
    objects = {name: ObjectReading(z=o.z, grasped=o.grasped)
               for name, o in state.objects.items()}
    return SensorFrame(t=state.t, joints=joints, truth_joints=truth,
                       objects=objects, gripper_force=dict(gripper_forces or {}))


def _sensor_map(compiled: CompiledScene):
    cached = getattr(compiled, "_sensor_map", None)
    if cached is None:
        cached = {}
        for entry in compiled.scene.entries:
            for s in entry.desc.sensors:
                cached[(s.kind, f"{entry.instance}/{s.target}")] = s
        compiled._sensor_map = cached
    return cached


class SimBridge:
    def __init__(self, scene: SceneModel, machine: Machine, config: SimConfig,
                 scenario_logic=None, log_stream: IO[str] | None = None,
                 scenario_name: str = "", success_state: str | None = None,
                 command_script: list[tuple[float, Command]] | None = None):
        problems = config.validate()
        errors, _ = validate_machine(machine)
        problems += errors
        if problems:
            raise CommandError("; ".join(problems))

        self.config = config
        self.machine = machine
        self.scenario_name = scenario_name
        self.success_state = success_state
        self.compiled = CompiledScene(scene)
        self.bounds = scene_bounds(scene)
        self.state = PhysicsState(self.compiled, config.dt_sim)
        self.logic = scenario_logic
        self.log = log_stream
        self._script = sorted(command_script or [], key=lambda x: x[0])
        self._script_pos = 0

        actuated = [n for i, n in enumerate(self.compiled.names)
                    if self.compiled.actuator_kind[i] != "none"]
        posture = {n: float(self.compiled.default_posture[self.compiled.index[n]])
                   for n in actuated}
        self.controller = Controller(actuated, self.bounds, config.dt_ctrl, posture)

        self.kind_codes = np.array(
            [ACTUATOR_KIND_CODES[k] for k in self.compiled.actuator_kind], dtype=np.int64)
        self.kp = self.compiled.default_kp.copy()
        self.kd = self.compiled.default_kd.copy()

        n = self.compiled.n_joints
        self._ref_prev_q = self.compiled.default_posture.copy()
        self._ref_prev_qd = np.zeros(n)
        self._ref_next_q = self.compiled.default_posture.copy()
        self._ref_next_qd = np.zeros(n)

        self.status = initial_status(machine)
        self.rng = np.random.default_rng(config.rng_seed)
        self.speed = config.realtime_factor
        self.paused = config.paused
        self._pending_single = 0
        self._operator_targets: dict[str, float] = {}

        self._queue: queue.Queue[Command] = queue.Queue()
        self._lock = threading.RLock()
        self._stop = threading.Event()
        self.tick_count = 0
        self.max_overrun = 0.0
        self._last_tasks: tuple[PostureTask, ...] = ()

        self.datastore = Datastore()
        self.datastore.register("servo.set_gains", self._ds_set_gains,
                                "fn(joint, kp, kd) -> None")
        self.datastore.register("servo.get_gains", self._ds_get_gains,
                                "fn(joint) -> ServoGains")
        self.datastore.register("camera.frame", camera_stub_frame,
                                "fn(camera) -> frame descriptor")

        if self.log is not None:
            self._log_record({
                "type": "header", "scenario": scenario_name,
                "seed": config.rng_seed, "dt_sim": config.dt_sim,
                "ctrl_divisor": config.ctrl_divisor,
                "joints": self.compiled.names,
            })

    # --- datastore callbacks ------------------------------------------------

    def _ds_set_gains(self, joint: str, kp: float, kd: float):
        i = self.compiled.index[joint]
        self.kp[i] = kp
        self.kd[i] = kd
        if self.datastore.has(f"servo.gains.{joint}"):
            self.datastore.remove(f"servo.gains.{joint}")
        self.datastore.put(f"servo.gains.{joint}", ServoGains(kp=kp, kd=kd), "ServoGains")

    def _ds_get_gains(self, joint: str) -> ServoGains:
        i = self.compiled.index[joint]
        return ServoGains(kp=float(self.kp[i]), kd=float(self.kd[i]))

    # --- cross-thread API ---------------------------------------------------

    def enqueue(self, cmd: Command) -> tuple[bool, str]:
        """Validate and queue a command; (accepted, reason)."""
        try:
            self._validate_command(cmd)
        except CommandError as e:
            return False, str(e)
        self._queue.put(cmd)
        return True, ""

    def _validate_command(self, cmd: Command):
        if isinstance(cmd, ApplyPerturbation):
            if cmd.target not in self.compiled.index and cmd.target not in self.compiled.objects:
                raise CommandError(f"unknown perturbation target '{cmd.target}'")
            if not math.isfinite(cmd.magnitude) or not (cmd.duration > 0):
                raise CommandError("perturbation needs finite magnitude and duration > 0")
        elif isinstance(cmd, SetGains):
            if cmd.joint not in self.compiled.index:
                raise CommandError(f"unknown joint '{cmd.joint}'")
            if not (math.isfinite(cmd.kp) and cmd.kp >= 0 and math.isfinite(cmd.kd) and cmd.kd >= 0):
                raise CommandError("gains must be finite and >= 0")
        elif isinstance(cmd, SetSpeed):
            if not math.isfinite(cmd.factor) or cmd.factor < 0:
                raise CommandError("speed factor must be finite and >= 0")
        elif isinstance(cmd, StepOnce):
            if cmd.substeps < 1:
                raise CommandError("substeps must be >= 1")
        elif isinstance(cmd, Transition):
            if cmd.state not in self.machine.state_names():
                raise CommandError(
                    f"unknown state '{cmd.state}'; valid states: {self.machine.state_names()}")
        elif isinstance(cmd, SetPostureTarget):
            if cmd.joint not in self.bounds.joints:
                raise CommandError(f"unknown or passive joint '{cmd.joint}'")
            lo, hi = self.bounds.joints[cmd.joint].pos
            if not (math.isfinite(cmd.position) and lo <= cmd.position <= hi):
                raise CommandError(f"target for '{cmd.joint}' outside bounds [{lo}, {hi}]")

    def snapshot(self) -> Snapshot:
        with self._lock:
            st = self.state
            joints = {}
            for i, name in enumerate(self.compiled.names):
                joints[name] = {
                    "q": float(st.q[i]), "qd": float(st.qd[i]),
                    "tau": float(st.applied[i]),
                    "q_ref": float(self._ref_next_q[i]),
                    "qd_ref": float(self._ref_next_qd[i]),
                }
            gains = {
                name: {"kp": float(self.kp[i]), "kd": float(self.kd[i])}
                for i, name in enumerate(self.compiled.names)
                if self.compiled.actuator_kind[i] != "none"
            }
            objects = {name: {"z": o.z, "grasped": o.grasped}
                       for name, o in st.objects.items()}
            return Snapshot(
                t=st.t, step_count=st.step_count, joints=joints,
                fsm_state=self.status.current,
                fsm_elapsed=self.status.elapsed(st.t),
                fsm_terminal=self.status.terminal,
                objects=objects, gains=gains, speed=self.speed,
                paused=self.paused, tick_count=self.tick_count,
                max_overrun=self.max_overrun,
            )

    def request_stop(self):
        self._stop.set()

    # --- the loop -----------------------------------------------------------

    def run(self, duration: float | None = None,
            stop_on_terminal: bool = True) -> RunReport:
        """Run until ``duration`` sim-seconds elapse (from now), the FSM
        goes terminal (if stop_on_terminal), or request_stop is called."""
        wall_start = time.perf_counter()
        target_steps = None
        if duration is not None:
            target_steps = self.state.step_count + round(duration / self.config.dt_sim)
        deadline = time.perf_counter()

        while not self._stop.is_set():
            if target_steps is not None and self.state.step_count >= target_steps:
                break
            if stop_on_terminal and self.status.terminal:
                break
            if self.paused and self._pending_single == 0:
                self._drain_commands()
                if self.paused and self._pending_single == 0:
                    time.sleep(0.001)
                    deadline = time.perf_counter()
                    continue
            self._substep()
            self._drain_commands()
            if self._pending_single > 0:
                self._pending_single -= 1
            if self.speed > 0:
                deadline += self.config.dt_sim / self.speed
                now = time.perf_counter()
                # OS sleep oversleeps by ~0.1 ms and more under load, far
                # too coarse for sub-millisecond substep budgets. Sleep
                # only the bulk of a large lead (undersleeping on purpose)
                # and busy-wait the final stretch against the absolute
                # schedule.
                if deadline - now > 0.002:
                    time.sleep(deadline - now - 0.0015)
                    now = time.perf_counter()
                while now < deadline:
                    now = time.perf_counter()
                if deadline < now - 0.1:
                    # far behind schedule (stall or persistent overload):
                    # bound the backlog so we slow down rather than burst.
                    # Sim steps are never skipped either way.
                    deadline = now - 0.1

        wall = time.perf_counter() - wall_start
        report = RunReport(
            substeps=self.state.step_count, ticks=self.tick_count,
            final_t=self.state.t, dt_sim=self.config.dt_sim,
            ctrl_divisor=self.config.ctrl_divisor,
            fsm_state=self.status.current, terminal=self.status.terminal,
            max_overrun=self.max_overrun, wall_time=wall,
            objects={name: {"z": o.z, "grasped": o.grasped}
                     for name, o in self.state.objects.items()},
        )
        if self.success_state is not None:
            report.success = self.status.current == self.success_state
        else:
            report.success = True
        return report

    def run_substeps(self, n: int):
        """Advance exactly n substeps (test/offline helper; no pacing)."""
        for _ in range(n):
            self._substep()
            self._drain_commands()

    def _substep(self):
        with self._lock:
            i = self.state.step_count
            K = self.config.ctrl_divisor
            if i % K == 0:
                self._controller_tick()
            k = i % K + 1
            q_ref, qd_ref = interpolate_arrays(
                self._ref_prev_q, self._ref_prev_qd,
                self._ref_next_q, self._ref_next_qd,
                k, K, self.config.interpolation)
            u = commands_array(self.kind_codes, self.kp, self.kd,
                               q_ref, qd_ref, self.state.q, self.state.qd)
            self.state = physics.step(self.state, u)

    def _controller_tick(self):
        tick_start = time.perf_counter()
        forces = self.logic.gripper_forces() if self.logic is not None else None
        frame = sample_sensors(self.state, self.rng, forces)
        if self.logic is not None:
            frame = self.logic.update(self.state, frame)

        self.status, tasks = fsm_step(self.status, self.machine, frame,
                                      self.config.dt_ctrl, self.datastore)
        if self._operator_targets:
            tasks = tasks + (PostureTask(targets=dict(self._operator_targets),
                                         stiffness=self.config.operator_stiffness),)
        self._last_tasks = tasks
        output = self.controller.tick(frame, tasks)

        self._ref_prev_q = self._ref_next_q
        self._ref_prev_qd = self._ref_next_qd
        next_q = self._ref_next_q.copy()
        next_qd = self._ref_next_qd.copy()
        for name, ref in output.items():
            j = self.compiled.index[name]
            next_q[j] = ref.q_ref
            next_qd[j] = ref.qd_ref
        self._ref_next_q = next_q
        self._ref_next_qd = next_qd

        self.tick_count += 1
        overrun = (time.perf_counter() - tick_start) - self.config.dt_ctrl
        if overrun > self.max_overrun:
            self.max_overrun = overrun

        if self.log is not None:
            self._log_record({
                "type": "tick", "t": frame.t,
                "fsm": {"state": self.status.current,
                        "elapsed": self.status.elapsed(frame.t)},
                "joints": {
                    name: {"q": r.q, "qd": r.qd, "tau": r.tau,
                           "q_ref": float(next_q[self.compiled.index[name]]),
                           "qd_ref": float(next_qd[self.compiled.index[name]])}
                    for name, r in frame.truth_joints.items()
                },
                "objects": {name: {"z": o.z, "grasped": o.grasped}
                            for name, o in self.state.objects.items()},
            })

    def _drain_commands(self):
        # scripted commands fire once their sim time is reached
        while (self._script_pos < len(self._script)
               and self._script[self._script_pos][0] <= self.state.t):
            self._apply_command(self._script[self._script_pos][1], scripted=True)
            self._script_pos += 1
        while True:
            try:
                cmd = self._queue.get_nowait()
            except queue.Empty:
                return
            self._apply_command(cmd)

    def _apply_command(self, cmd: Command, scripted: bool = False):
        with self._lock:
            if isinstance(cmd, ApplyPerturbation):
                self.state = physics.apply_external(
                    self.state, cmd.target, cmd.magnitude, cmd.duration)
            elif isinstance(cmd, SetGains):
                self.datastore.call("servo.set_gains", cmd.joint, cmd.kp, cmd.kd)
            elif isinstance(cmd, SetSpeed):
                self.speed = cmd.factor
            elif isinstance(cmd, Pause):
                self.paused = cmd.paused
            elif isinstance(cmd, StepOnce):
                self._pending_single += cmd.substeps
            elif isinstance(cmd, Transition):
                self.status = request_transition(
                    self.status, self.machine, cmd.state, self.state.t)
            elif isinstance(cmd, SetPostureTarget):
                self._operator_targets[cmd.joint] = cmd.position
            elif isinstance(cmd, ResetScenario):
                self._reset()
            if self.log is not None:
                self._log_record({
                    "type": "event", "t": self.state.t, "scripted": scripted,
                    "cmd": {"kind": type(cmd).__name__, **vars(cmd)},
                })

    def _reset(self):
        self.state = physics.reset(self.state)
        self.status = initial_status(self.machine)
        posture = {n: float(self.compiled.default_posture[self.compiled.index[n]])
                   for n in self.controller.refs}
        self.controller.reset(posture)
        self._ref_prev_q = self.compiled.default_posture.copy()
        self._ref_prev_qd = np.zeros(self.compiled.n_joints)
        self._ref_next_q = self.compiled.default_posture.copy()
        self._ref_next_qd = np.zeros(self.compiled.n_joints)
        self._operator_targets.clear()
        self.rng = np.random.default_rng(self.config.rng_seed)
        if self.logic is not None:
            self.logic.reset()

    def _log_record(self, record: dict):
        self.log.write(json.dumps(record, sort_keys=True,
                                  separators=(",", ":")) + "\n")
