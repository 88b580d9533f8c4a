/**
 * Readers for the simulation package's on-disk interface.
 *
 * Every CSV starts with a `# schema_version=N` line and every JSON carries
 * a `schema_version` field; anything else is rejected up front with an
 * explicit version error rather than a confusing parse failure further in.
 * Inputs are only ever read.
 */

import { readFileSync, readdirSync, statSync } from "node:fs";
import path from "node:path";

export const SCHEMA_VERSION = 1;

export class SchemaVersionError extends Error {
  constructor(file: string, got: string) {
    super(
      `${file}: expected schema_version=${SCHEMA_VERSION}, got ${got}; ` +
        "regenerate the inputs or use a matching plots version",
    );
    this.name = "SchemaVersionError";
  }
}

export class EmptyInputError extends Error {
  constructor(file: string) {
    super(`${file}: no data rows; refusing to render a blank figure`);
    this.name = "EmptyInputError";
  }
}

export interface Table {
  columns: string[];
  /** Row-major numeric cells; non-numeric cells parse as NaN. */
  rows: number[][];
}

export function readCsv(file: string): Table {
  const text = readFileSync(file, "utf-8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  const m = /^# schema_version=(\S+)$/.exec(lines[0] ?? "");
  if (!m || Number(m[1]) !== SCHEMA_VERSION) {
    throw new SchemaVersionError(file, m ? m[1] : "none");
  }
  if (lines.length < 2) throw new EmptyInputError(file);
  const columns = lines[1].split(",");
  const rows = lines.slice(2).map((line) => line.split(",").map(Number));
  if (rows.length === 0) throw new EmptyInputError(file);
  return { columns, rows };
}

function readJson(file: string): Record<string, unknown> {
  const data = JSON.parse(readFileSync(file, "utf-8"));
  if (data.schema_version !== SCHEMA_VERSION) {
    throw new SchemaVersionError(file, String(data.schema_version ?? "none"));
  }
  return data;
}

export function column(table: Table, name: string): number[] {
  const i = table.columns.indexOf(name);
  if (i < 0) {
    throw new Error(`column ${name} not found in [${table.columns.join(", ")}]`);
  }
  return table.rows.map((r) => r[i]);
}

// ---------------------------------------------------------------------------
// run directories
// ---------------------------------------------------------------------------

export interface WignerSnapshot {
  time: number;
  condition: string; // "uncond" | "plus_x"
  halfExtent: number;
  nPoints: number;
  negativityVolume: number;
  modeOccupation: number;
  /** values[i][j]: q index i, p index j, both on the same centred axis. */
  values: number[][];
}

export interface RunDir {
  label: string;
  meta: Record<string, unknown>;
  guideVelocity: number | null;
  timeseries: Table;
  occupations: Table;
  snapshots: WignerSnapshot[];
}

export function loadRunDir(dir: string): RunDir {
  const meta = readJson(path.join(dir, "meta.json"));
  const snapshots: WignerSnapshot[] = [];
  for (const name of readdirSync(dir).sort()) {
    const m = /^(wigner_(.+)_t\d+p\d+)\.json$/.exec(name);
    if (!m) continue;
    const side = readJson(path.join(dir, name)) as {
      time: number;
      condition: string;
      grid: { half_extent: number; n_points: number };
      negativity_volume: number;
      mode_occupation: number;
    };
    const grid = readCsv(path.join(dir, `${m[1]}.csv`));
    snapshots.push({
      time: side.time,
      condition: side.condition,
      halfExtent: side.grid.half_extent,
      nPoints: side.grid.n_points,
      negativityVolume: side.negativity_volume,
      modeOccupation: side.mode_occupation,
      values: grid.rows,
    });
  }
  snapshots.sort((a, b) => a.time - b.time || a.condition.localeCompare(b.condition));
  const guide = meta.guide_velocity;
  return {
    label: path.basename(path.resolve(dir)),
    meta,
    guideVelocity: typeof guide === "number" ? guide : null,
    timeseries: readCsv(path.join(dir, "timeseries.csv")),
    occupations: readCsv(path.join(dir, "occupations.csv")),
    snapshots,
  };
}

/**
 * A grid input is either one run directory or a directory of run
 * directories (one row per sub-run, sorted by name).
 */
export function loadRunRows(dir: string): RunDir[] {
  if (statSync(path.join(dir, "meta.json"), { throwIfNoEntry: false })) {
    return [loadRunDir(dir)];
  }
  const subs = readdirSync(dir)
    .sort()
    .filter((name) =>
      statSync(path.join(dir, name, "meta.json"), { throwIfNoEntry: false }),
    );
  if (subs.length === 0) {
    throw new EmptyInputError(`${dir} (no run directories found)`);
  }
  return subs.map((name) => loadRunDir(path.join(dir, name)));
}

// ---------------------------------------------------------------------------
// sweep directories
// ---------------------------------------------------------------------------

export interface SweepRow {
  alpha: number;
  s: number;
  theta: number;
  peakVncCond: number;
  status: string;
}

export interface SweepDir {
  alphas: number[];
  ss: number[];
  thetas: number[];
  rows: SweepRow[];
}

export function loadSweepDir(dir: string): SweepDir {
  const meta = readJson(path.join(dir, "sweep_meta.json")) as {
    alphas: number[];
    ss: number[];
    thetas: number[];
  };
  const file = path.join(dir, "sweep_summary.csv");
  const text = readFileSync(file, "utf-8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  const m = /^# schema_version=(\S+)$/.exec(lines[0] ?? "");
  if (!m || Number(m[1]) !== SCHEMA_VERSION) {
    throw new SchemaVersionError(file, m ? m[1] : "none");
  }
  if (lines.length < 3) throw new EmptyInputError(file);
  const columns = lines[1].split(",");
  const iAlpha = columns.indexOf("alpha");
  const iS = columns.indexOf("s");
  const iTheta = columns.indexOf("theta");
  const iPeak = columns.indexOf("peak_vnc_cond");
  const nNumeric = columns.length - 1; // trailing column is the quoted status
  const rows = lines.slice(2).map((line) => {
    const parts = line.split(",");
    const status = parts.slice(nNumeric).join(",").replace(/^"|"$/g, "");
    return {
      alpha: Number(parts[iAlpha]),
      s: Number(parts[iS]),
      theta: Number(parts[iTheta]),
      peakVncCond: Number(parts[iPeak]),
      status,
    };
  });
  return { alphas: meta.alphas, ss: meta.ss, thetas: meta.thetas, rows };
}
