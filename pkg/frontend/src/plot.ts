/**
 * Top-level plotting entry: trace file in, SVG/PNG figure out.
 *
 * Reading is strictly read-only and rendering is deterministic: the same
 * trace always yields the same extracted point set and the same output bytes.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { extname } from "node:path";

import { renderPng } from "./png.js";
import { buildScene } from "./scene.js";
import { renderSvg } from "./svg.js";
import {
  CwndSeries,
  EventMarker,
  extractCwndSeries,
  extractMarkers,
  parseTrace,
  pointSetText,
} from "./trace.js";

export interface PlotSpec {
  input: string;
  output: string;
  conn?: number;
  subflow?: number;
  fromUs?: number;
  toUs?: number;
  annotations?: boolean;
  title?: string;
}

export interface PlotResult {
  rowsRead: number;
  series: CwndSeries[];
  markers: EventMarker[];
  pointSet: string;
}

export function plotCwnd(spec: PlotSpec): PlotResult {
  const text = readFileSync(spec.input, "utf8");
  const rows = parseTrace(text);
  const filter = {
    conn: spec.conn,
    subflow: spec.subflow,
    fromUs: spec.fromUs,
    toUs: spec.toUs,
  };
  const series = extractCwndSeries(rows, filter);
  if (series.length === 0) {
    throw new Error("no CWND rows to plot after filtering");
  }
  const markers = spec.annotations === false ? [] : extractMarkers(rows, filter);
  const scene = buildScene(series, markers, {
    title: spec.title,
    annotations: spec.annotations,
  });

  const ext = extname(spec.output).toLowerCase();
  if (ext === ".svg") {
    writeFileSync(spec.output, renderSvg(scene));
  } else if (ext === ".png") {
    writeFileSync(spec.output, renderPng(scene));
  } else {
    throw new Error(`unsupported output extension: ${ext || "(none)"} (use .svg or .png)`);
  }
  return {
    rowsRead: rows.length,
    series,
    markers,
    pointSet: pointSetText(series, markers),
  };
}
