/** Wire protocol types and codecs for the simbridge WebSocket service.
 *
 * The panel is a pure client of this protocol: every message it sends is
 * a CommandMessage, every message it receives is one of the server
 * messages below. Non-finite numbers are rejected in both directions.
 */

export interface JointTelemetry {
  q: number;
  qd: number;
  tau: number;
  q_ref: number;
  qd_ref: number;
}

export interface FsmTelemetry {
  state: string;
  elapsed: number;
  terminal: boolean;
}

export interface ObjectTelemetry {
  z: number;
  grasped: boolean;
}

export interface GainTelemetry {
  kp: number;
  kd: number;
}

export interface StateMessage {
  type: "state";
  seq: number;
  t: number;
  joints: Record<string, JointTelemetry>;
  fsm: FsmTelemetry;
  objects: Record<string, ObjectTelemetry>;
  gains: Record<string, GainTelemetry>;
  speed: number;
  paused: boolean;
}

export interface AckMessage {
  type: "ack";
  id: string;
  accepted: boolean;
  reason?: string;
  seq?: number;
}

export interface ErrorMessage {
  type: "error";
  reason: string;
}

export type ServerMessage = StateMessage | AckMessage | ErrorMessage;

export type Command =
  | { kind: "perturb"; target: string; magnitude: number; duration: number }
  | { kind: "set_gains"; joint: string; kp: number; kd: number }
  | { kind: "set_speed"; factor: number }
  | { kind: "pause"; paused: boolean }
  | { kind: "step_once"; substeps: number }
  | { kind: "transition"; state: string }
  | { kind: "set_posture_target"; joint: string; position: number }
  | { kind: "reset" };

export class ProtocolError extends Error {}

function assertFinite(value: unknown, path: string): void {
  if (typeof value === "number") {
    if (!Number.isFinite(value)) {
      throw new ProtocolError(`non-finite number at ${path}`);
    }
    return;
  }
  if (Array.isArray(value)) {
    value.forEach((v, i) => assertFinite(v, `${path}[${i}]`));
    return;
  }
  if (value !== null && typeof value === "object") {
    for (const [k, v] of Object.entries(value)) {
      assertFinite(v, `${path}.${k}`);
    }
  }
}

/** Parse a server frame; throws ProtocolError on malformed input. */
export function decodeServer(text: string): ServerMessage {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new ProtocolError("malformed JSON from server");
  }
  if (doc === null || typeof doc !== "object" || Array.isArray(doc)) {
    throw new ProtocolError("server message must be a JSON object");
  }
  const msg = doc as Record<string, unknown>;
  const type = msg["type"];
  if (type !== "state" && type !== "ack" && type !== "error") {
    throw new ProtocolError(`unknown server message type '${String(type)}'`);
  }
  assertFinite(msg, "$");
  if (type === "state") {
    for (const key of ["seq", "t", "joints", "fsm"]) {
      if (!(key in msg)) {
        throw new ProtocolError(`state message missing '${key}'`);
      }
    }
  }
  if (type === "ack" && typeof msg["id"] !== "string") {
    throw new ProtocolError("ack message missing 'id'");
  }
  return msg as unknown as ServerMessage;
}

/** Serialize a command frame; throws ProtocolError on non-finite params. */
export function encodeCommand(id: string, cmd: Command): string {
  if (!id) {
    throw new ProtocolError("command id must be non-empty");
  }
  assertFinite(cmd, "cmd");
  return JSON.stringify({ type: "cmd", id, cmd });
}
