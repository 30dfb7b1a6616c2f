"""Wire codec for the telemetry/command protocol.

JSON text frames: TelemetryMessage server->client, CommandMessage
client->server, acks for every command. All numbers on the wire are
finite doubles; NaN/Inf are rejected in both directions.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .bridge import Command, Snapshot
from .errors import ProtocolError
from .scenario import command_from_dict, command_to_dict

_CMD_KEYS = {"type", "id", "cmd"}


def _check_finite(value: Any, where: str):
    if isinstance(value, bool):
        return
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ProtocolError(f"{where}: non-finite number on the wire")
    elif isinstance(value, dict):
        for k, v in value.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _check_finite(v, f"{where}[{i}]")


def encode_state(snapshot: Snapshot, seq: int) -> dict:
    msg = {
        "type": "state",
        "seq": seq,
        "t": snapshot.t,
        "joints": {
            name: {"q": j["q"], "qd": j["qd"], "tau": j["tau"], "q_ref": j["q_ref"]}
            for name, j in snapshot.joints.items()
        },
        "fsm": {"state": snapshot.fsm_state, "elapsed": snapshot.fsm_elapsed,
                "terminal": snapshot.fsm_terminal},
        "objects": {name: {"z": o["z"], "grasped": o["grasped"]}
                    for name, o in snapshot.objects.items()},
        "gains": snapshot.gains,
        "speed": snapshot.speed,
        "paused": snapshot.paused,
    }
    _check_finite(msg, "state")
    return msg


def encode_state_text(snapshot: Snapshot, seq: int) -> str:
    return json.dumps(encode_state(snapshot, seq), sort_keys=True, allow_nan=False)


def decode_command(text: str) -> tuple[str, Command]:
    """Parse a client CommandMessage; returns (id, command)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed JSON: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ProtocolError("command message must be a JSON object")
    if doc.get("type") != "cmd":
        raise ProtocolError("missing or wrong 'type' (expected \"cmd\")")
    unknown = set(doc) - _CMD_KEYS
    if unknown:
        raise ProtocolError(f"unknown fields {sorted(unknown)}")
    msg_id = doc.get("id")
    if not isinstance(msg_id, str) or not msg_id:
        raise ProtocolError("missing command 'id'")
    cd = doc.get("cmd")
    if not isinstance(cd, dict):
        raise ProtocolError("missing 'cmd' object")
    _check_finite(cd, "cmd")
    try:
        cmd = command_from_dict(cd)
    except Exception as e:
        raise ProtocolError(str(e)) from e
    _validate_types(cmd)
    return msg_id, cmd


def _validate_types(cmd: Command):
    for name, value in vars(cmd).items():
        expected = type(cmd).__dataclass_fields__[name].type
        if expected == "float" and not isinstance(value, (int, float)):
            raise ProtocolError(
                f"{type(cmd).__name__}.{name}: expected a number, got {type(value).__name__}")
        if expected == "float" and isinstance(value, bool):
            raise ProtocolError(f"{type(cmd).__name__}.{name}: expected a number")
        if expected == "int" and (isinstance(value, bool) or not isinstance(value, int)):
            raise ProtocolError(
                f"{type(cmd).__name__}.{name}: expected an integer, got {type(value).__name__}")
        if expected == "str" and not isinstance(value, str):
            raise ProtocolError(
                f"{type(cmd).__name__}.{name}: expected a string, got {type(value).__name__}")
        if expected == "bool" and not isinstance(value, bool):
            raise ProtocolError(
                f"{type(cmd).__name__}.{name}: expected a boolean, got {type(value).__name__}")


def encode_command(msg_id: str, cmd: Command) -> dict:
    doc = {"type": "cmd", "id": msg_id, "cmd": command_to_dict(cmd)}
    _check_finite(doc["cmd"], "cmd")
    return doc


def encode_ack(msg_id: str, accepted: bool, reason: str = "",
               seq: int | None = None) -> dict:
    ack: dict = {"type": "ack", "id": msg_id, "accepted": accepted}
    if reason:
        ack["reason"] = reason
    if seq is not None:
        ack["seq"] = seq
    return ack


def encode_error(reason: str) -> dict:
    return {"type": "error", "reason": reason}


STATE_CHANGING = ("perturb", "set_gains", "pause", "step_once", "transition",
                  "set_posture_target", "reset", "set_speed")


def telemetry_decimate(snapshots, internal_hz: float, rate_hz: float):
    """Yield every floor(internal/rate)-th snapshot from a substep stream."""
    if rate_hz <= 0 or rate_hz > internal_hz:
        raise ProtocolError("target rate must be in (0, internal rate]")
    stride = int(internal_hz // rate_hz)
    for i, snap in enumerate(snapshots):
        if i % stride == 0:
            yield snap
