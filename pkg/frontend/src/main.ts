/**
 * CLI: render a congestion-window figure from a simulator trace.
 *
 * Usage:
 *   mptcpsim-plot <trace.csv> <out.svg|out.png> [--conn N] [--subflow N] [--from SECONDS]
 *                 [--to SECONDS] [--no-annotations] [--title TEXT]
 */

import { plotCwnd } from "./plot.js";

function usage(): string {
  return (
    "usage: mptcpsim-plot <trace.csv> <out.svg|out.png> " +
    "[--conn N] [--subflow N] [--from SECONDS] [--to SECONDS] [--no-annotations] [--title TEXT]"
  );
}

export function runCli(argv: string[]): number {
  const positional: string[] = [];
  let conn: number | undefined;
  let subflow: number | undefined;
  let fromUs: number | undefined;
  let toUs: number | undefined;
  let annotations = true;
  let title: string | undefined;

  const numberArg = (flag: string, value: string | undefined): number => {
    const parsed = Number(value);
    if (value === undefined || !Number.isFinite(parsed)) {
      throw new Error(`${flag} needs a numeric argument`);
    }
    return parsed;
  };

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--conn") {
      conn = numberArg(arg, argv[++i]);
    } else if (arg === "--subflow") {
      subflow = numberArg(arg, argv[++i]);
    } else if (arg === "--from") {
      fromUs = Math.round(numberArg(arg, argv[++i]) * 1e6);
    } else if (arg === "--to") {
      toUs = Math.round(numberArg(arg, argv[++i]) * 1e6);
    } else if (arg === "--no-annotations") {
      annotations = false;
    } else if (arg === "--title") {
      title = argv[++i];
      if (title === undefined) throw new Error("--title needs an argument");
    } else if (arg === "--help" || arg === "-h") {
      console.log(usage());
      return 0;
    } else if (arg.startsWith("--")) {
      throw new Error(`unknown flag: ${arg}`);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 2) {
    throw new Error(usage());
  }

  const result = plotCwnd({
    input: positional[0],
    output: positional[1],
    conn,
    subflow,
    fromUs,
    toUs,
    annotations,
    title,
  });
  const plotted = result.series
    .map((s) => `conn ${s.connId} subflow ${s.subflowId} (${s.points.length} points)`)
    .join(", ");
  console.log(`rows read: ${result.rowsRead}`);
  console.log(`subflows plotted: ${result.series.length} [${plotted}]`);
  console.log(`markers: ${result.markers.length}`);
  console.log(`wrote ${positional[1]}`);
  return 0;
}

const isMain =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (isMain) {
  try {
    process.exit(runCli(process.argv.slice(2)));
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    process.exit(1);
  }
}
