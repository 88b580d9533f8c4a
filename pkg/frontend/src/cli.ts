#!/usr/bin/env node
/**
 * plot --kind <timeseries|heatmap|sweep_map|wigner_grid|wigner_frames>
 *      --in <dir> --out <file-or-dir>
 *      [--condition plus_x|uncond] [--limit <abs>] [--scale <n>]
 *
 * Reads only the simulation package's CSV/JSON outputs.  wigner_grid
 * accepts either one run directory or a directory of run directories;
 * wigner_frames treats --out as a directory and fills it with numbered
 * PNG frames plus a manifest (encode with any tool you like, e.g. the
 * ffmpeg line in the manifest).
 */

import { mkdirSync, writeFileSync } from "node:fs";
import path from "node:path";
import { parseArgs } from "node:util";

import { EmptyInputError, SchemaVersionError, loadRunDir, loadRunRows, loadSweepDir } from "./data.js";
import {
  renderHeatmap,
  renderSweepMap,
  renderTimeseries,
  renderWignerFrames,
  renderWignerGrid,
} from "./figures.js";

const KINDS = ["timeseries", "heatmap", "sweep_map", "wigner_grid", "wigner_frames"];

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
        condition: { type: "string" },
        limit: { type: "string" },
        scale: { type: "string" },
      },
    }).values;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  const { kind, in: inDir, out } = args;
  if (!kind || !inDir || !out || !KINDS.includes(kind)) {
    console.error(`usage: plot --kind <${KINDS.join("|")}> --in <dir> --out <file>`);
    return 2;
  }
  const opts = {
    condition: args.condition,
    limit: args.limit ? Number(args.limit) : undefined,
    scale: args.scale ? Number(args.scale) : undefined,
  };

  try {
    if (kind === "timeseries") {
      writeFileSync(out, renderTimeseries(loadRunDir(inDir)));
    } else if (kind === "heatmap") {
      writeFileSync(out, renderHeatmap(loadRunDir(inDir)));
    } else if (kind === "sweep_map") {
      writeFileSync(out, renderSweepMap(loadSweepDir(inDir)));
    } else if (kind === "wigner_grid") {
      writeFileSync(out, renderWignerGrid(loadRunRows(inDir), opts));
    } else {
      const { frames, manifest } = renderWignerFrames(loadRunDir(inDir), opts);
      mkdirSync(out, { recursive: true });
      for (const f of frames) {
        writeFileSync(path.join(out, f.name), f.bytes);
      }
      writeFileSync(path.join(out, "frames.json"), manifest);
      console.log(`wrote ${frames.length} frames to ${out}`);
      return 0;
    }
  } catch (err) {
    if (err instanceof SchemaVersionError || err instanceof EmptyInputError) {
      console.error(err.message);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`input not found: ${(err as NodeJS.ErrnoException).path}`);
      return 2;
    }
    throw err;
  }
  console.log(`wrote ${out}`);
  return 0;
}

const invoked = process.argv[1] && import.meta.url.endsWith(path.basename(process.argv[1]));
if (invoked) {
  process.exit(main(process.argv.slice(2)));
}
