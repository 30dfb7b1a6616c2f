import { describe, expect, it } from "vitest";

import {
  Command,
  ProtocolError,
  decodeServer,
  encodeCommand,
} from "../src/protocol.js";

const STATE = {
  type: "state",
  seq: 3,
  t: 0.5,
  joints: { "arm/lift": { q: 0.4, qd: 0, tau: 1.2, q_ref: 0.4, qd_ref: 0 } },
  fsm: { state: "Reach", elapsed: 0.2, terminal: false },
  objects: { box: { z: 0.4, grasped: false } },
  gains: { "arm/lift": { kp: 600, kd: 40 } },
  speed: 1,
  paused: false,
};

describe("decodeServer", () => {
  it("parses state, ack and error frames", () => {
    expect(decodeServer(JSON.stringify(STATE)).type).toBe("state");
    const ack = decodeServer(
      JSON.stringify({ type: "ack", id: "a1", accepted: true, seq: 4 }),
    );
    expect(ack).toMatchObject({ type: "ack", id: "a1", accepted: true });
    const err = decodeServer(JSON.stringify({ type: "error", reason: "nope" }));
    expect(err.type).toBe("error");
  });

  it("rejects malformed JSON with a ProtocolError", () => {
    expect(() => decodeServer("{oops")).toThrow(ProtocolError);
    expect(() => decodeServer("[1,2]")).toThrow(ProtocolError);
  });

  it("rejects unknown message types", () => {
    expect(() => decodeServer(JSON.stringify({ type: "telemetry" })))
      .toThrow(/telemetry/);
  });

  it("rejects incomplete frames", () => {
    expect(() => decodeServer(JSON.stringify({ type: "state", seq: 1 })))
      .toThrow(ProtocolError);
    expect(() => decodeServer(JSON.stringify({ type: "ack", accepted: true })))
      .toThrow(/id/);
  });

  it("rejects non-finite numbers anywhere in the payload", () => {
    const text = JSON.stringify(STATE).replace("0.4", "1e999");
    expect(() => decodeServer(text)).toThrow(/non-finite/);
  });
});

describe("encodeCommand", () => {
  const COMMANDS: Command[] = [
    { kind: "perturb", target: "arm/lift", magnitude: 2, duration: 0.1 },
    { kind: "set_gains", joint: "arm/lift", kp: 500, kd: 40 },
    { kind: "set_speed", factor: 2 },
    { kind: "pause", paused: true },
    { kind: "step_once", substeps: 1 },
    { kind: "transition", state: "Lift" },
    { kind: "set_posture_target", joint: "arm/lift", position: 0.5 },
    { kind: "reset" },
  ];

  it("wraps every command kind in the wire envelope", () => {
    for (const cmd of COMMANDS) {
      const doc = JSON.parse(encodeCommand("c1", cmd));
      expect(doc).toEqual({ type: "cmd", id: "c1", cmd });
    }
  });

  it("never puts NaN or Infinity on the wire", () => {
    expect(() => encodeCommand("c1", { kind: "set_speed", factor: NaN }))
      .toThrow(/non-finite/);
    expect(() =>
      encodeCommand("c1", {
        kind: "perturb",
        target: "x",
        magnitude: Infinity,
        duration: 0.1,
      }),
    ).toThrow(ProtocolError);
  });

  it("requires a non-empty id", () => {
    expect(() => encodeCommand("", { kind: "reset" })).toThrow(ProtocolError);
  });
});
