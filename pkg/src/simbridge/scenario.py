"""Scenario documents: scene entries + fsm section + sim config (+ optional
grasp logic and a timestamped command script)."""

from __future__ import annotations

import json
from pathlib import Path

from .bridge import (ApplyPerturbation, Pause, ResetScenario, SetGains,
                     SetPostureTarget, SetSpeed, SimBridge, SimConfig,
                     StepOnce, Transition)
from .demo import GraspConfig, GraspLogic
from .errors import DescriptionError
from .fsm import machine_from_dict
from .model import merge_scene, parse_description_dict

_SCENARIO_KEYS = {
    "name", "sim", "robots", "objects", "fsm", "grasp",
    "success_state", "commands",
}

_COMMAND_KINDS = {
    "perturb": ApplyPerturbation,
    "set_gains": SetGains,
    "set_speed": SetSpeed,
    "pause": Pause,
    "step_once": StepOnce,
    "transition": Transition,
    "set_posture_target": SetPostureTarget,
    "reset": ResetScenario,
}


def command_from_dict(cd: dict):
    kind = cd.get("kind")
    cls = _COMMAND_KINDS.get(kind)
    if cls is None:
        raise DescriptionError(f"unknown command kind '{kind}'")
    params = {k: v for k, v in cd.items() if k != "kind"}
    try:
        return cls(**params)
    except TypeError as e:
        raise DescriptionError(f"bad parameters for command '{kind}': {e}") from e


def command_to_dict(cmd) -> dict:
    for kind, cls in _COMMAND_KINDS.items():
        if type(cmd) is cls:
            return {"kind": kind, **vars(cmd)}
    raise DescriptionError(f"unknown command type {type(cmd).__name__}")


def load_scenario_dict(doc: dict, strict: bool = True):
    """Parse a scenario dict into (scene, machine, config, logic, success_state, script)."""
    unknown = set(doc) - _SCENARIO_KEYS
    if unknown and strict:
        raise DescriptionError(f"scenario: unknown keys {sorted(unknown)}")

    sim = doc.get("sim", {})
    config = SimConfig(
        dt_sim=float(sim.get("dt_sim", 0.001)),
        ctrl_divisor=int(sim.get("ctrl_divisor", 5)),
        realtime_factor=float(sim.get("realtime_factor", 0.0)),
        paused=bool(sim.get("paused", False)),
        rng_seed=int(sim.get("seed", 0)),
        interpolation=sim.get("interpolation", "linear"),
    )
    problems = config.validate()
    if problems:
        raise DescriptionError(problems)

    entries = []
    objects = []
    for rd in doc.get("robots", []):
        desc, bounds, objs = parse_description_dict(rd["description"], strict=strict)
        entries.append((rd["instance"], desc, bounds))
        objects.extend(objs)
    for od in doc.get("objects", []):
        from .model import ObjectSpec
        objects.append(ObjectSpec(
            name=od["name"], mass=float(od["mass"]),
            rest_height=float(od["rest_height"]),
            table_height=float(od["table_height"]),
        ))
    scene = merge_scene(entries, objects)

    if "fsm" not in doc:
        raise DescriptionError("scenario is missing the 'fsm' section")
    machine = machine_from_dict(doc["fsm"])

    logic = None
    if "grasp" in doc:
        g = doc["grasp"]
        logic = GraspLogic(GraspConfig(
            object=g["object"], lift_joint=g["lift_joint"],
            gripper_joint=g["gripper_joint"],
            reach_targets={k: float(v) for k, v in g["reach_targets"].items()},
            aperture_close=float(g.get("aperture_close", 0.05)),
            reach_tol=float(g.get("reach_tol", 0.05)),
            lift_height=float(g.get("lift_height", 0.1)),
            clamp_force=float(g.get("clamp_force", 5.0)),
        ))

    script = [(float(cd["t"]), command_from_dict(cd["cmd"]))
              for cd in doc.get("commands", [])]
    return scene, machine, config, logic, doc.get("success_state"), script


def load_scenario_file(path: str | Path, strict: bool = True):
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DescriptionError(
            f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return doc, load_scenario_dict(doc, strict=strict)


def make_bridge(doc: dict, log_stream=None, strict: bool = True,
                speed: float | None = None) -> SimBridge:
    scene, machine, config, logic, success_state, script = load_scenario_dict(doc, strict=strict)
    if speed is not None:
        from dataclasses import replace
        config = replace(config, realtime_factor=speed)
    return SimBridge(scene, machine, config, scenario_logic=logic,
                     log_stream=log_stream, scenario_name=doc.get("name", ""),
                     success_state=success_state, command_script=script)
