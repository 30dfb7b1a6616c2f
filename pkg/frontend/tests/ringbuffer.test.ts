import { describe, expect, it } from "vitest";

import { RingBuffer } from "../src/ringbuffer.js";

describe("RingBuffer", () => {
  it("appends in order below capacity", () => {
    const buf = new RingBuffer<number>(4);
    buf.push(1);
    buf.push(2);
    buf.push(3);
    expect(buf.length).toBe(3);
    expect(buf.toArray()).toEqual([1, 2, 3]);
    expect(buf.last()).toBe(3);
  });

  it("evicts the oldest beyond capacity", () => {
    const buf = new RingBuffer<number>(1000);
    for (let i = 0; i < 1001; i += 1) {
      buf.push(i);
    }
    expect(buf.length).toBe(1000);
    expect(buf.at(0)).toBe(1); // the 0th sample was evicted
    expect(buf.last()).toBe(1000);
  });

  it("wraps repeatedly without losing order", () => {
    const buf = new RingBuffer<number>(3);
    for (let i = 0; i < 10; i += 1) {
      buf.push(i);
    }
    expect(buf.toArray()).toEqual([7, 8, 9]);
  });

  it("clear empties the buffer", () => {
    const buf = new RingBuffer<number>(2);
    buf.push(1);
    buf.clear();
    expect(buf.length).toBe(0);
    expect(buf.last()).toBeUndefined();
  });

  it("rejects non-positive capacity", () => {
    expect(() => new RingBuffer(0)).toThrow(RangeError);
    expect(() => new RingBuffer(2.5)).toThrow(RangeError);
  });

  it("range-checks indexed access", () => {
    const buf = new RingBuffer<number>(2);
    buf.push(1);
    expect(() => buf.at(1)).toThrow(RangeError);
  });
});
