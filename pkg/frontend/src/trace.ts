/**
 * Trace CSV parsing and series extraction.
 *
 * The input is the simulator's trace file: header row
 * `time_us,conn_id,subflow_id,event_kind,seq,ack,cwnd_bytes,ssthresh_bytes,detail`,
 * LF line endings, decimal integers, empty cells where a column does not
 * apply. Parsing is read-only and deterministic.
 */

export interface TraceRow {
  timeUs: number;
  connId: number | null;
  subflowId: number | null;
  eventKind: string;
  seq: number | null;
  ack: number | null;
  cwndBytes: number | null;
  ssthreshBytes: number | null;
  detail: string;
}

export const REQUIRED_COLUMNS = [
  "time_us",
  "conn_id",
  "subflow_id",
  "event_kind",
  "seq",
  "ack",
  "cwnd_bytes",
  "ssthresh_bytes",
  "detail",
] as const;

/** Event kinds drawn as vertical annotation markers. */
export const MARKER_KINDS = [
  "SPURIOUS_EIFEL",
  "SPURIOUS_DSACK",
  "DSACK_SS_BEGIN",
  "DSACK_SS_END",
] as const;

function parseCell(cell: string, column: string, lineNo: number): number | null {
  if (cell === "") return null;
  const value = Number(cell);
  if (!Number.isFinite(value)) {
    throw new Error(`line ${lineNo}: column ${column}: not a number: ${cell}`);
  }
  return value;
}

export function parseTrace(text: string): TraceRow[] {
  const lines = text.split("\n");
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) {
    throw new Error("empty trace: no header row");
  }
  const header = lines[0].split(",");
  const index = new Map<string, number>();
  header.forEach((name, i) => index.set(name, i));
  for (const column of REQUIRED_COLUMNS) {
    if (!index.has(column)) {
      throw new Error(`missing column: ${column}`);
    }
  }
  if (lines.length === 1) {
    throw new Error("empty trace: header row only");
  }
  const col = (cells: string[], name: string) => cells[index.get(name)!] ?? "";
  const rows: TraceRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(`line ${i + 1}: expected ${header.length} cells, got ${cells.length}`);
    }
    const lineNo = i + 1;
    const timeUs = parseCell(col(cells, "time_us"), "time_us", lineNo);
    if (timeUs === null) {
      throw new Error(`line ${lineNo}: column time_us: must not be empty`);
    }
    rows.push({
      timeUs,
      connId: parseCell(col(cells, "conn_id"), "conn_id", lineNo),
      subflowId: parseCell(col(cells, "subflow_id"), "subflow_id", lineNo),
      eventKind: col(cells, "event_kind"),
      seq: parseCell(col(cells, "seq"), "seq", lineNo),
      ack: parseCell(col(cells, "ack"), "ack", lineNo),
      cwndBytes: parseCell(col(cells, "cwnd_bytes"), "cwnd_bytes", lineNo),
      ssthreshBytes: parseCell(col(cells, "ssthresh_bytes"), "ssthresh_bytes", lineNo),
      detail: col(cells, "detail"),
    });
  }
  return rows;
}

export interface SeriesPoint {
  timeUs: number;
  cwndBytes: number;
}

export interface CwndSeries {
  connId: number;
  subflowId: number;
  points: SeriesPoint[];
}

export interface EventMarker {
  timeUs: number;
  kind: string;
  connId: number | null;
  subflowId: number | null;
}

export interface RowFilter {
  conn?: number;
  subflow?: number;
  fromUs?: number;
  toUs?: number;
}

function inRange(timeUs: number, filter: RowFilter): boolean {
  if (filter.fromUs !== undefined && timeUs < filter.fromUs) return false;
  if (filter.toUs !== undefined && timeUs > filter.toUs) return false;
  return true;
}

/** One step series per (conn, subflow) that ever logged a CWND row. */
export function extractCwndSeries(rows: TraceRow[], filter: RowFilter = {}): CwndSeries[] {
  const series = new Map<string, CwndSeries>();
  for (const row of rows) {
    if (row.eventKind !== "CWND") continue;
    if (row.connId === null || row.subflowId === null || row.cwndBytes === null) continue;
    if (filter.conn !== undefined && row.connId !== filter.conn) continue;
    if (filter.subflow !== undefined && row.subflowId !== filter.subflow) continue;
    if (!inRange(row.timeUs, filter)) continue;
    const key = `${row.connId}/${row.subflowId}`;
    let entry = series.get(key);
    if (!entry) {
      entry = { connId: row.connId, subflowId: row.subflowId, points: [] };
      series.set(key, entry);
    }
    entry.points.push({ timeUs: row.timeUs, cwndBytes: row.cwndBytes });
  }
  return [...series.values()].sort(
    (a, b) => a.connId - b.connId || a.subflowId - b.subflowId,
  );
}

export function extractMarkers(rows: TraceRow[], filter: RowFilter = {}): EventMarker[] {
  const kinds = new Set<string>(MARKER_KINDS);
  const markers: EventMarker[] = [];
  for (const row of rows) {
    if (!kinds.has(row.eventKind)) continue;
    if (filter.conn !== undefined && row.connId !== filter.conn) continue;
    if (filter.subflow !== undefined && row.subflowId !== filter.subflow) continue;
    if (!inRange(row.timeUs, filter)) continue;
    markers.push({
      timeUs: row.timeUs,
      kind: row.eventKind,
      connId: row.connId,
      subflowId: row.subflowId,
    });
  }
  return markers;
}

/**
 * Canonical text form of the plotted point set; equal inputs must produce
 * byte-identical extractions.
 */
export function pointSetText(series: CwndSeries[], markers: EventMarker[]): string {
  const parts: string[] = [];
  for (const s of series) {
    const pts = s.points.map((p) => `${p.timeUs}:${p.cwndBytes}`).join(" ");
    parts.push(`series ${s.connId}/${s.subflowId} ${pts}`);
  }
  for (const m of markers) {
    parts.push(`marker ${m.kind} ${m.timeUs} ${m.connId ?? ""}/${m.subflowId ?? ""}`);
  }
  return parts.join("\n") + "\n";
}
