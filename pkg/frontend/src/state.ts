/** Panel state and its pure update functions.
 *
 * The panel performs no simulation logic: this module only folds server
 * messages and user actions into a view model. Plot buffers are bounded
 * rings keyed "joint:channel" and only ever append monotonically
 * increasing sequence numbers; out-of-order and duplicate telemetry is
 * dropped.
 */

import { RingBuffer } from "./ringbuffer.js";
import type { AckMessage, StateMessage } from "./protocol.js";

export type Channel = "q" | "qd" | "tau" | "q_ref";

export interface Sample {
  t: number;
  v: number;
}

export interface PendingCommand {
  kind: string;
  sentAt: number; // ms timestamp
}

export interface PanelState {
  connection: "connecting" | "open" | "closed";
  latest: StateMessage | null;
  lastSeq: number;
  lastMessageAt: number; // ms timestamp of the last state message
  channels: Set<string>; // "joint:channel" keys selected for plotting
  buffers: Map<string, RingBuffer<Sample>>;
  bufferCapacity: number;
  pending: Map<string, PendingCommand>;
  toasts: string[];
}

export const ACK_TIMEOUT_MS = 2000;
export const STALE_AFTER_MS = 1000;

export function initialState(bufferCapacity = 1000): PanelState {
  return {
    connection: "connecting",
    latest: null,
    lastSeq: -1,
    lastMessageAt: 0,
    channels: new Set(),
    buffers: new Map(),
    bufferCapacity,
    pending: new Map(),
    toasts: [],
  };
}

export function channelKey(joint: string, channel: Channel): string {
  return `${joint}:${channel}`;
}

/** Fold one telemetry frame in; returns false if it was dropped. */
export function applyState(
  state: PanelState,
  msg: StateMessage,
  now: number,
): boolean {
  if (msg.seq <= state.lastSeq) {
    return false; // duplicate or out-of-order: never rewind the plots
  }
  state.lastSeq = msg.seq;
  state.latest = msg;
  state.lastMessageAt = now;
  for (const key of state.channels) {
    const sep = key.lastIndexOf(":");
    const joint = key.slice(0, sep);
    const channel = key.slice(sep + 1) as Channel;
    const reading = msg.joints[joint];
    if (reading === undefined) {
      continue;
    }
    let buffer = state.buffers.get(key);
    if (buffer === undefined) {
      buffer = new RingBuffer<Sample>(state.bufferCapacity);
      state.buffers.set(key, buffer);
    }
    buffer.push({ t: msg.t, v: reading[channel] });
  }
  return true;
}

/** Resolve a pending command; rejected commands surface a toast. */
export function applyAck(state: PanelState, msg: AckMessage): void {
  const pending = state.pending.get(msg.id);
  state.pending.delete(msg.id);
  if (!msg.accepted) {
    const kind = pending ? pending.kind : "command";
    state.toasts.push(`${kind} rejected: ${msg.reason ?? "unknown reason"}`);
  }
}

export function recordCommand(
  state: PanelState,
  id: string,
  kind: string,
  now: number,
): void {
  state.pending.set(id, { kind, sentAt: now });
}

/** Turn commands unacked for more than ACK_TIMEOUT_MS into error toasts. */
export function expirePending(state: PanelState, now: number): string[] {
  const expired: string[] = [];
  for (const [id, cmd] of state.pending) {
    if (now - cmd.sentAt > ACK_TIMEOUT_MS) {
      state.pending.delete(id);
      const toast = `${cmd.kind} not acknowledged within ${ACK_TIMEOUT_MS / 1000} s`;
      state.toasts.push(toast);
      expired.push(id);
    }
  }
  return expired;
}

/** Telemetry older than STALE_AFTER_MS means the stream went quiet. */
export function isStale(state: PanelState, now: number): boolean {
  return state.latest !== null && now - state.lastMessageAt > STALE_AFTER_MS;
}

export function toggleChannel(
  state: PanelState,
  joint: string,
  channel: Channel,
): void {
  const key = channelKey(joint, channel);
  if (state.channels.has(key)) {
    state.channels.delete(key);
    state.buffers.delete(key);
  } else {
    state.channels.add(key);
  }
}

export function takeToasts(state: PanelState): string[] {
  const out = state.toasts;
  state.toasts = [];
  return out;
}
