/** Minimal canvas line plot for streaming samples. */

import { RingBuffer } from "./ringbuffer.js";
import type { Sample } from "./state.js";

const COLORS = ["#4ec9b0", "#d7ba7d", "#c586c0", "#9cdcfe", "#ce9178", "#b5cea8"];

export function colorFor(index: number): string {
  return COLORS[index % COLORS.length] as string;
}

export function drawPlot(
  canvas: HTMLCanvasElement,
  series: Map<string, RingBuffer<Sample>>,
): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#1e1e1e";
  ctx.fillRect(0, 0, width, height);

  let tMin = Infinity;
  let tMax = -Infinity;
  let vMin = Infinity;
  let vMax = -Infinity;
  for (const buffer of series.values()) {
    for (const { t, v } of buffer.toArray()) {
      tMin = Math.min(tMin, t);
      tMax = Math.max(tMax, t);
      vMin = Math.min(vMin, v);
      vMax = Math.max(vMax, v);
    }
  }
  if (!Number.isFinite(tMin) || tMax === tMin) {
    return;
  }
  if (vMax === vMin) {
    vMax += 0.5;
    vMin -= 0.5;
  }
  const pad = 8;
  const x = (t: number) => pad + ((t - tMin) / (tMax - tMin)) * (width - 2 * pad);
  const y = (v: number) =>
    height - pad - ((v - vMin) / (vMax - vMin)) * (height - 2 * pad);

  let index = 0;
  ctx.font = "11px monospace";
  for (const [key, buffer] of series) {
    const samples = buffer.toArray();
    ctx.strokeStyle = colorFor(index);
    ctx.beginPath();
    samples.forEach((s, i) => {
      if (i === 0) {
        ctx.moveTo(x(s.t), y(s.v));
      } else {
        ctx.lineTo(x(s.t), y(s.v));
      }
    });
    ctx.stroke();
    ctx.fillStyle = colorFor(index);
    ctx.fillText(key, pad + 4, pad + 12 + index * 13);
    index += 1;
  }
  ctx.fillStyle = "#888";
  ctx.fillText(`${tMin.toFixed(2)}s`, pad, height - 2);
  ctx.fillText(`${tMax.toFixed(2)}s`, width - 60, height - 2);
  ctx.fillText(vMax.toPrecision(3), width - 60, pad + 10);
  ctx.fillText(vMin.toPrecision(3), width - 60, height - pad - 2);
}
