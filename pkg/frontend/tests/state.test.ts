import { describe, expect, it } from "vitest";

import type { StateMessage } from "../src/protocol.js";
import {
  ACK_TIMEOUT_MS,
  STALE_AFTER_MS,
  applyAck,
  applyState,
  channelKey,
  expirePending,
  initialState,
  isStale,
  recordCommand,
  takeToasts,
  toggleChannel,
} from "../src/state.js";

function frame(seq: number, t: number, q = 0.1): StateMessage {
  return {
    type: "state",
    seq,
    t,
    joints: { "arm/lift": { q, qd: 0, tau: 0, q_ref: q, qd_ref: 0 } },
    fsm: { state: "Reach", elapsed: t, terminal: false },
    objects: {},
    gains: { "arm/lift": { kp: 600, kd: 40 } },
    speed: 1,
    paused: false,
  };
}

describe("applyState", () => {
  it("appends selected channels with monotonically increasing t", () => {
    const state = initialState(100);
    toggleChannel(state, "arm/lift", "q");
    expect(applyState(state, frame(1, 0.02, 0.1), 0)).toBe(true);
    expect(applyState(state, frame(2, 0.04, 0.2), 20)).toBe(true);
    const buffer = state.buffers.get(channelKey("arm/lift", "q"))!;
    expect(buffer.toArray()).toEqual([
      { t: 0.02, v: 0.1 },
      { t: 0.04, v: 0.2 },
    ]);
  });

  it("drops duplicate and out-of-order seq", () => {
    const state = initialState(100);
    toggleChannel(state, "arm/lift", "q");
    applyState(state, frame(5, 0.1), 0);
    expect(applyState(state, frame(5, 0.1), 1)).toBe(false); // duplicate
    expect(applyState(state, frame(4, 0.08), 2)).toBe(false); // stale
    expect(state.buffers.get(channelKey("arm/lift", "q"))!.length).toBe(1);
    expect(state.latest!.seq).toBe(5);
  });

  it("leaves buffers untouched with no channels selected", () => {
    const state = initialState(100);
    applyState(state, frame(1, 0.02), 0);
    expect(state.buffers.size).toBe(0);
    expect(state.latest!.seq).toBe(1);
  });

  it("bounds buffers at capacity", () => {
    const state = initialState(10);
    toggleChannel(state, "arm/lift", "q");
    for (let i = 1; i <= 25; i += 1) {
      applyState(state, frame(i, i * 0.02), i);
    }
    const buffer = state.buffers.get(channelKey("arm/lift", "q"))!;
    expect(buffer.length).toBe(10);
    expect(buffer.at(0).t).toBeCloseTo(16 * 0.02);
  });

  it("toggling a channel off drops its buffer", () => {
    const state = initialState(10);
    toggleChannel(state, "arm/lift", "q");
    applyState(state, frame(1, 0.02), 0);
    toggleChannel(state, "arm/lift", "q");
    expect(state.buffers.size).toBe(0);
  });
});

describe("command tracking", () => {
  it("accepted acks resolve silently", () => {
    const state = initialState();
    recordCommand(state, "c1", "set_gains", 0);
    applyAck(state, { type: "ack", id: "c1", accepted: true });
    expect(state.pending.size).toBe(0);
    expect(takeToasts(state)).toEqual([]);
  });

  it("rejected acks surface a toast with the reason", () => {
    const state = initialState();
    recordCommand(state, "c2", "transition", 0);
    applyAck(state, {
      type: "ack",
      id: "c2",
      accepted: false,
      reason: "unknown state",
    });
    const toasts = takeToasts(state);
    expect(toasts).toHaveLength(1);
    expect(toasts[0]).toContain("transition");
    expect(toasts[0]).toContain("unknown state");
  });

  it("commands unacked past the timeout become error toasts", () => {
    const state = initialState();
    recordCommand(state, "c3", "perturb", 1000);
    expect(expirePending(state, 1000 + ACK_TIMEOUT_MS)).toEqual([]);
    const expired = expirePending(state, 1001 + ACK_TIMEOUT_MS);
    expect(expired).toEqual(["c3"]);
    expect(state.pending.size).toBe(0);
    expect(takeToasts(state)[0]).toContain("perturb");
  });
});

describe("staleness", () => {
  it("is never stale before the first frame", () => {
    const state = initialState();
    expect(isStale(state, 10_000)).toBe(false);
  });

  it("flags a gap longer than the threshold", () => {
    const state = initialState();
    applyState(state, frame(1, 0.02), 5000);
    expect(isStale(state, 5000 + STALE_AFTER_MS)).toBe(false);
    expect(isStale(state, 5001 + STALE_AFTER_MS)).toBe(true);
  });
});
