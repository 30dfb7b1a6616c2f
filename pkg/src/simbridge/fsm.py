"""Finite-state-machine runtime.

States carry posture tasks and a completion criterion; transitions fire
automatically when the criterion (or the state timeout) is met, or
immediately on operator request. At most one transition happens per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .control import PostureTask, SensorFrame
from .datastore import Datastore
from .errors import DescriptionError, SimBridgeError

CRITERION_KINDS = (
    "timer", "error_below", "gripper_closed", "object_height", "contact",
    "datastore_flag", "all_of",
)


@dataclass(frozen=True)
class Criterion:
    kind: str
    seconds: float = 0.0            # timer
    eps: float = 0.0                # error_below
    hold: float = 0.0               # error_below
    joint: str = ""                 # gripper_closed / contact target
    aperture_max: float = 0.0       # gripper_closed
    object: str = ""                # object_height
    z_min: float = 0.0              # object_height
    force_min: float = 0.0          # contact
    key: str = ""                   # datastore_flag
    criteria: tuple["Criterion", ...] = ()  # all_of

    def validate(self, where: str) -> list[str]:
        p = []
        if self.kind not in CRITERION_KINDS:
            p.append(f"{where}: unknown criterion kind '{self.kind}'")
        elif self.kind == "timer" and self.seconds < 0:
            p.append(f"{where}: timer seconds must be >= 0")
        elif self.kind == "error_below" and (self.eps <= 0 or self.hold < 0):
            p.append(f"{where}: error_below needs eps > 0 and hold >= 0")
        elif self.kind == "gripper_closed" and (not self.joint or self.aperture_max <= 0):
            p.append(f"{where}: gripper_closed needs a joint and aperture_max > 0")
        elif self.kind == "object_height" and not self.object:
            p.append(f"{where}: object_height needs an object name")
        elif self.kind == "contact" and (not self.joint or self.force_min <= 0):
            p.append(f"{where}: contact needs a joint and force_min > 0")
        elif self.kind == "datastore_flag" and not self.key:
            p.append(f"{where}: datastore_flag needs a key")
        elif self.kind == "all_of":
            for c in self.criteria:
                p.extend(c.validate(where))
        return p


@dataclass(frozen=True)
class StateDef:
    name: str
    tasks: tuple[PostureTask, ...] = ()
    criterion: Criterion = field(default_factory=lambda: Criterion(kind="timer", seconds=0.0))
    timeout: float = 0.0                 # 0 = none; fires as a forced transition
    on_complete: str | None = None       # None = terminal state


@dataclass(frozen=True)
class Machine:
    states: tuple[StateDef, ...]
    initial: str

    def state(self, name: str) -> StateDef:
        for s in self.states:
            if s.name == name:
                return s
        raise KeyError(name)

    def state_names(self) -> list[str]:
        return [s.name for s in self.states]


@dataclass(frozen=True)
class FsmStatus:
    current: str
    entered_at: float = 0.0
    hold_accum: float = 0.0
    terminal: bool = False

    def elapsed(self, t: float) -> float:
        return t - self.entered_at


def validate_machine(machine: Machine) -> tuple[list[str], list[str]]:
    """Returns (errors, warnings). Unreachable states only warn."""
    errors, warnings = [], []
    names = machine.state_names()
    if len(set(names)) != len(names):
        errors.append("duplicate state names")
    if machine.initial not in names:
        errors.append(f"initial state '{machine.initial}' is not defined")
    for s in machine.states:
        if s.on_complete is not None and s.on_complete not in names:
            errors.append(f"state '{s.name}': on_complete targets unknown state '{s.on_complete}'")
        errors.extend(s.criterion.validate(f"state '{s.name}'"))
        if s.timeout < 0:
            errors.append(f"state '{s.name}': timeout must be >= 0")
    if not errors:
        reachable = {machine.initial}
        frontier = [machine.initial]
        while frontier:
            nxt = machine.state(frontier.pop()).on_complete
            if nxt is not None and nxt not in reachable:
                reachable.add(nxt)
                frontier.append(nxt)
        for n in names:
            if n not in reachable:
                warnings.append(f"state '{n}' is unreachable from '{machine.initial}'")
    return errors, warnings


def initial_status(machine: Machine, t: float = 0.0) -> FsmStatus:
    state = machine.state(machine.initial)
    return FsmStatus(current=machine.initial, entered_at=t,
                     terminal=state.on_complete is None)


def _criterion_met(crit: Criterion, state: StateDef, status: FsmStatus,
                   frame: SensorFrame, datastore: Datastore | None) -> bool:
    if crit.kind == "timer":
        return status.elapsed(frame.t) >= crit.seconds
    if crit.kind == "error_below":
        # instantaneous part; the hold window is accumulated by fsm_step
        return _task_error(state, frame) < crit.eps
    if crit.kind == "gripper_closed":
        return frame.joints[crit.joint].q <= crit.aperture_max
    if crit.kind == "object_height":
        return frame.objects[crit.object].z >= crit.z_min
    if crit.kind == "contact":
        return frame.gripper_force.get(crit.joint, 0.0) >= crit.force_min
    if crit.kind == "datastore_flag":
        return bool(datastore is not None and datastore.has(crit.key)
                    and datastore.get(crit.key))
    if crit.kind == "all_of":
        return all(_criterion_met(c, state, status, frame, datastore)
                   for c in crit.criteria)
    raise SimBridgeError(f"unknown criterion kind '{crit.kind}'")


def _task_error(state: StateDef, frame: SensorFrame) -> float:
    worst = 0.0
    for task in state.tasks:
        for joint, target in task.targets.items():
            worst = max(worst, abs(target - frame.joints[joint].q))
    return worst


def _needs_hold(crit: Criterion) -> float:
    """Hold window in seconds required by the criterion (0 when none)."""
    if crit.kind == "error_below":
        return crit.hold
    if crit.kind == "all_of":
        return max((_needs_hold(c) for c in crit.criteria), default=0.0)
    return 0.0


def fsm_step(status: FsmStatus, machine: Machine, frame: SensorFrame,
             dt_ctrl: float, datastore: Datastore | None = None,
             ) -> tuple[FsmStatus, tuple[PostureTask, ...]]:
    """Advance the machine by one controller tick.

    Returns the updated status and the active tasks: after a transition
    the new state's tasks are active on the same tick.
    """
    state = machine.state(status.current)
    if status.terminal:
        return status, state.tasks

    met = _criterion_met(state.criterion, state, status, frame, datastore)
    hold = _needs_hold(state.criterion)
    if hold > 0:
        accum = status.hold_accum + dt_ctrl if met else 0.0
        status = replace(status, hold_accum=accum)
        met = accum >= hold

    timed_out = state.timeout > 0 and status.elapsed(frame.t) >= state.timeout
    if met or timed_out:
        nxt = machine.state(state.on_complete)
        status = FsmStatus(current=nxt.name, entered_at=frame.t,
                           terminal=nxt.on_complete is None)
        return status, nxt.tasks
    return status, state.tasks


def request_transition(status: FsmStatus, machine: Machine, target: str,
                       t: float) -> FsmStatus:
    """Operator-forced transition, criterion ignored. Self-target re-enters."""
    if status.terminal:
        raise SimBridgeError("cannot transition out of a terminal status")
    if target not in machine.state_names():
        raise SimBridgeError(
            f"unknown state '{target}'; valid states: {machine.state_names()}")
    nxt = machine.state(target)
    return FsmStatus(current=target, entered_at=t,
                     terminal=nxt.on_complete is None)


# --- JSON section ("fsm": {"initial": ..., "states": [...]}) ---------------

def machine_from_dict(doc: dict) -> Machine:
    try:
        states = []
        for sd in doc["states"]:
            tasks = tuple(
                PostureTask(
                    targets={k: float(v) for k, v in td["targets"].items()},
                    stiffness=float(td.get("stiffness", 30.0)),
                    damping_ratio=float(td.get("damping_ratio", 1.0)),
                    weight=float(td.get("weight", 1.0)),
                )
                for td in sd.get("tasks", [])
            )
            states.append(StateDef(
                name=sd["name"],
                tasks=tasks,
                criterion=_criterion_from_dict(sd.get("criterion", {"kind": "timer", "seconds": 0.0})),
                timeout=float(sd.get("timeout", 0.0)),
                on_complete=sd.get("on_complete"),
            ))
        machine = Machine(states=tuple(states), initial=doc["initial"])
    except (KeyError, TypeError, ValueError) as e:
        raise DescriptionError(f"bad fsm section: {e!r}") from e
    errors, _ = validate_machine(machine)
    if errors:
        raise DescriptionError(errors)
    return machine


def _criterion_from_dict(cd: dict) -> Criterion:
    kind = cd.get("kind", "timer")
    if kind == "all_of":
        return Criterion(kind=kind, criteria=tuple(
            _criterion_from_dict(c) for c in cd.get("criteria", [])))
    fields = {k: v for k, v in cd.items() if k != "kind"}
    return Criterion(kind=kind, **fields)


def machine_to_dict(machine: Machine) -> dict:
    def crit(c: Criterion) -> dict:
        if c.kind == "all_of":
            return {"kind": "all_of", "criteria": [crit(x) for x in c.criteria]}
        keep = {
            "timer": ("seconds",),
            "error_below": ("eps", "hold"),
            "gripper_closed": ("joint", "aperture_max"),
            "object_height": ("object", "z_min"),
            "contact": ("joint", "force_min"),
            "datastore_flag": ("key",),
        }[c.kind]
        return {"kind": c.kind, **{k: getattr(c, k) for k in keep}}

    return {
        "initial": machine.initial,
        "states": [
            {
                "name": s.name,
                "tasks": [
                    {"targets": dict(t.targets), "stiffness": t.stiffness,
                     "damping_ratio": t.damping_ratio, "weight": t.weight}
                    for t in s.tasks
                ],
                "criterion": crit(s.criterion),
                "timeout": s.timeout,
                "on_complete": s.on_complete,
            }
            for s in machine.states
        ],
    }
