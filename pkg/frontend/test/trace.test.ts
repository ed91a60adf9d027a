import { describe, expect, it } from "vitest";

import {
  extractCwndSeries,
  extractMarkers,
  parseTrace,
  pointSetText,
} from "../src/trace.js";

const HEADER = "time_us,conn_id,subflow_id,event_kind,seq,ack,cwnd_bytes,ssthresh_bytes,detail";

const SMALL = [
  HEADER,
  "0,0,0,STATE,,,,,SYN_SENT",
  "100,0,0,CWND,,,1400,65536,",
  "200,0,0,CWND,,,2800,65536,",
  "250,0,1,CWND,,,1400,65536,",
  "300,0,0,SPURIOUS_EIFEL,1400,,,,restored_cwnd_bytes=2800",
  "350,0,0,CWND,,,4200,65536,",
  "400,1,0,CWND,,,1400,65536,",
].join("\n") + "\n";

describe("parseTrace", () => {
  it("parses rows with empty cells as nulls", () => {
    const rows = parseTrace(SMALL);
    expect(rows).toHaveLength(7);
    expect(rows[0].eventKind).toBe("STATE");
    expect(rows[0].cwndBytes).toBeNull();
    expect(rows[1].cwndBytes).toBe(1400);
    expect(rows[4].detail).toBe("restored_cwnd_bytes=2800");
  });

  it("names the missing column", () => {
    const broken = SMALL.replace("cwnd_bytes", "window");
    expect(() => parseTrace(broken)).toThrow(/missing column: cwnd_bytes/);
  });

  it("rejects a header-only file as an empty trace", () => {
    expect(() => parseTrace(HEADER + "\n")).toThrow(/empty trace/);
  });

  it("rejects an entirely empty file", () => {
    expect(() => parseTrace("")).toThrow(/empty trace/);
  });

  it("reports the line of a malformed cell", () => {
    const broken = SMALL.replace("100,0,0,CWND", "abc,0,0,CWND");
    expect(() => parseTrace(broken)).toThrow(/line 3/);
  });
});

describe("extractCwndSeries", () => {
  it("groups CWND rows per (conn, subflow)", () => {
    const series = extractCwndSeries(parseTrace(SMALL));
    expect(series.map((s) => [s.connId, s.subflowId])).toEqual([
      [0, 0],
      [0, 1],
      [1, 0],
    ]);
    expect(series[0].points).toEqual([
      { timeUs: 100, cwndBytes: 1400 },
      { timeUs: 200, cwndBytes: 2800 },
      { timeUs: 350, cwndBytes: 4200 },
    ]);
  });

  it("applies conn, subflow and time filters", () => {
    const rows = parseTrace(SMALL);
    expect(extractCwndSeries(rows, { subflow: 1 })).toHaveLength(1);
    expect(extractCwndSeries(rows, { conn: 0 })).toHaveLength(2);
    const windowed = extractCwndSeries(rows, { fromUs: 150, toUs: 260 });
    expect(windowed[0].points).toEqual([{ timeUs: 200, cwndBytes: 2800 }]);
  });
});

describe("extractMarkers", () => {
  it("collects the spurious and regrowth events", () => {
    const markers = extractMarkers(parseTrace(SMALL));
    expect(markers).toEqual([
      { timeUs: 300, kind: "SPURIOUS_EIFEL", connId: 0, subflowId: 0 },
    ]);
  });
});

describe("pointSetText", () => {
  it("is a stable canonical form", () => {
    const rows = parseTrace(SMALL);
    const a = pointSetText(extractCwndSeries(rows), extractMarkers(rows));
    const b = pointSetText(extractCwndSeries(parseTrace(SMALL)), extractMarkers(parseTrace(SMALL)));
    expect(a).toBe(b);
    expect(a).toContain("series 0/0 100:1400 200:2800 350:4200");
  });
});
