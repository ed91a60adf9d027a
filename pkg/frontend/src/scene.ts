/**
 * Backend-agnostic figure description.
 *
 * The layout (axes, ticks, step paths, markers, legend) is computed once into
 * a list of primitives; the SVG and PNG renderers draw the same scene, so
 * both outputs show the same point set.
 */

import { CwndSeries, EventMarker } from "./trace.js";

export type Primitive =
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string }
  | {
      kind: "line";
      x1: number;
      y1: number;
      x2: number;
      y2: number;
      color: string;
      width: number;
      dash?: string;
    }
  | { kind: "polyline"; points: [number, number][]; color: string; width: number }
  | {
      kind: "text";
      x: number;
      y: number;
      text: string;
      size: number;
      color: string;
      anchor: "start" | "middle" | "end";
    };

export interface Scene {
  width: number;
  height: number;
  prims: Primitive[];
}

export interface SceneOptions {
  title?: string;
  annotations?: boolean;
}

const SERIES_COLORS = ["#1f6fb2", "#c23b22", "#2d6a4f", "#9d4edd", "#b8860b", "#444444"];
const MARKER_COLOR = "#c23b22";
const W = 760;
const H = 360;
const ML = 64;
const MR = 16;
const MT = 34;
const MB = 46;

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const magnitude = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * magnitude).find((s) => s >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 0.001; v += step) {
    ticks.push(v);
  }
  return ticks;
}

function fmtSeconds(us: number): string {
  const s = us / 1e6;
  return Number.isInteger(s) ? String(s) : s.toFixed(2);
}

function fmtBytes(b: number): string {
  if (b >= 1_000_000) return `${(b / 1_000_000).toFixed(1)}M`;
  if (b >= 10_000) return `${Math.round(b / 1000)}k`;
  return String(b);
}

export function buildScene(
  series: CwndSeries[],
  markers: EventMarker[],
  opts: SceneOptions = {},
): Scene {
  const prims: Primitive[] = [];
  const pw = W - ML - MR;
  const ph = H - MT - MB;
  const annotate = opts.annotations !== false;

  const allPoints = series.flatMap((s) => s.points);
  const times = allPoints.map((p) => p.timeUs);
  if (annotate) times.push(...markers.map((m) => m.timeUs));
  const tMin = Math.min(...times);
  const tMax = Math.max(...times);
  const vMax = Math.max(...allPoints.map((p) => p.cwndBytes)) * 1.06;
  const xOf = (t: number) => ML + ((t - tMin) / (tMax - tMin || 1)) * pw;
  const yOf = (v: number) => MT + ph - (v / (vMax || 1)) * ph;

  prims.push({ kind: "rect", x: 0, y: 0, w: W, h: H, fill: "#ffffff" });
  prims.push({
    kind: "text",
    x: ML,
    y: MT - 14,
    text: opts.title ?? "congestion window over time",
    size: 12,
    color: "#222222",
    anchor: "start",
  });

  // grid and axis labels
  for (const v of niceTicks(0, vMax, 6)) {
    const y = yOf(v);
    prims.push({ kind: "line", x1: ML, y1: y, x2: ML + pw, y2: y, color: "#e6e6e6", width: 1 });
    prims.push({
      kind: "text",
      x: ML - 6,
      y: y + 3,
      text: fmtBytes(v),
      size: 9,
      color: "#555555",
      anchor: "end",
    });
  }
  for (const t of niceTicks(tMin, tMax, 8)) {
    const x = xOf(t);
    prims.push({
      kind: "line",
      x1: x,
      y1: MT + ph,
      x2: x,
      y2: MT + ph + 4,
      color: "#555555",
      width: 1,
    });
    prims.push({
      kind: "text",
      x,
      y: MT + ph + 16,
      text: fmtSeconds(t),
      size: 9,
      color: "#555555",
      anchor: "middle",
    });
  }
  prims.push({
    kind: "text",
    x: ML + pw / 2,
    y: H - 8,
    text: "time (s)",
    size: 10,
    color: "#333333",
    anchor: "middle",
  });
  prims.push({
    kind: "text",
    x: ML,
    y: MT - 2,
    text: "cwnd (bytes)",
    size: 9,
    color: "#555555",
    anchor: "start",
  });

  // axes
  prims.push({ kind: "line", x1: ML, y1: MT, x2: ML, y2: MT + ph, color: "#333333", width: 1 });
  prims.push({
    kind: "line",
    x1: ML,
    y1: MT + ph,
    x2: ML + pw,
    y2: MT + ph,
    color: "#333333",
    width: 1,
  });

  // event markers under the curves
  if (annotate) {
    for (const marker of markers) {
      const x = xOf(marker.timeUs);
      prims.push({
        kind: "line",
        x1: x,
        y1: MT,
        x2: x,
        y2: MT + ph,
        color: MARKER_COLOR,
        width: 1,
        dash: "3,3",
      });
      prims.push({
        kind: "text",
        x: x + 2,
        y: MT + 10,
        text: marker.kind,
        size: 7,
        color: MARKER_COLOR,
        anchor: "start",
      });
    }
  }

  // step curves: the window holds its value until the next change
  series.forEach((s, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    const pts: [number, number][] = [];
    let lastY: number | null = null;
    for (const p of s.points) {
      const x = xOf(p.timeUs);
      const y = yOf(p.cwndBytes);
      if (lastY !== null) pts.push([x, lastY]);
      pts.push([x, y]);
      lastY = y;
    }
    if (lastY !== null) pts.push([ML + pw, lastY]);
    prims.push({ kind: "polyline", points: pts, color, width: 1.4 });
  });

  // legend
  series.forEach((s, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    const x = ML + pw - 150;
    const y = MT + 12 + i * 14;
    prims.push({ kind: "line", x1: x, y1: y - 3, x2: x + 18, y2: y - 3, color, width: 2 });
    prims.push({
      kind: "text",
      x: x + 24,
      y,
      text: `conn ${s.connId} subflow ${s.subflowId}`,
      size: 9,
      color: "#333333",
      anchor: "start",
    });
  });

  return { width: W, height: H, prims };
}
