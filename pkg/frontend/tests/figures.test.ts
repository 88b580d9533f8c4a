import { mkdtempSync, readFileSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import {
  EmptyInputError,
  RunDir,
  WignerSnapshot,
  loadRunDir,
  loadSweepDir,
} from "../src/data.js";
import {
  WIGNER_LIMIT_DEFAULT,
  renderHeatmap,
  renderSweepMap,
  renderTimeseries,
  renderWignerFrames,
  renderWignerGrid,
} from "../src/figures.js";
import { decodePng } from "../src/png.js";

const FIX = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures");
const TINYRUN = path.join(FIX, "tinyrun");

/** Pull the n-th embedded base64 PNG back out of an SVG string. */
function embeddedPng(svg: string, index = 0) {
  const matches = [...svg.matchAll(/data:image\/png;base64,([A-Za-z0-9+/=]+)/g)];
  expect(matches.length).toBeGreaterThan(index);
  return decodePng(Buffer.from(matches[index][1], "base64"));
}

function countColors(img: ReturnType<typeof decodePng>) {
  let reddish = 0;
  let bluish = 0;
  for (let i = 0; i < img.data.length; i += 4) {
    const r = img.data[i];
    const b = img.data[i + 2];
    if (r > b + 12) reddish += 1;
    else if (b > r + 12) bluish += 1;
  }
  return { reddish, bluish };
}

describe("timeseries figure", () => {
  const run = loadRunDir(TINYRUN);

  it("renders four framed panels with legends", () => {
    const svg = renderTimeseries(run);
    expect(svg).toContain("negativity volume");
    expect(svg).toContain("leading fraction");
    expect((svg.match(/<polyline/g) ?? []).length).toBeGreaterThan(6);
  });

  it("is byte-identical across renders", () => {
    expect(renderTimeseries(run)).toBe(renderTimeseries(run));
  });
});

describe("occupation heatmap", () => {
  const run = loadRunDir(TINYRUN);

  it("embeds one raster cell per (site, record) and a dashed guide line", () => {
    const svg = renderHeatmap(run);
    const img = embeddedPng(svg);
    expect(img.width).toBe(run.occupations.rows.length);
    expect(img.height).toBe(run.occupations.columns.length - 1);
    expect(svg).toContain('stroke-dasharray="6,4"');
    expect(svg).toContain("chain site");
  });

  it("is deterministic", () => {
    expect(renderHeatmap(run)).toBe(renderHeatmap(run));
  });
});

describe("sweep landscape", () => {
  it("draws one cell per sweep point with value labels", () => {
    const sweep = loadSweepDir(path.join(FIX, "sweep"));
    const svg = renderSweepMap(sweep);
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThanOrEqual(4);
    expect(svg).toContain("spectral exponent s");
    expect(svg).toContain("coupling alpha");
    expect(renderSweepMap(sweep)).toBe(svg);
  });

  it("marks failed points instead of colouring them", () => {
    const sweep = loadSweepDir(path.join(FIX, "sweep"));
    sweep.rows[1] = { ...sweep.rows[1], status: "error: ResourceLimitError: boom" };
    expect(renderSweepMap(sweep)).toContain("failed");
  });
});

describe("wigner grid", () => {
  const run = loadRunDir(TINYRUN);

  it("lays out one panel per snapshot time with the V_nc annotation", () => {
    const svg = renderWignerGrid([run]);
    expect((svg.match(/<image/g) ?? []).length).toBe(3); // t = 0, 0.5, 1
    expect(svg).toContain("t = 0.5");
    expect(svg).toContain("V=");
    expect(svg).toContain("+x conditioned");
  });

  it("renders the vacuum snapshot as a red/white disk with no blue", () => {
    const svg = renderWignerGrid([run]);
    const { reddish, bluish } = countColors(embeddedPng(svg, 0)); // t=0 panel
    expect(reddish).toBeGreaterThan(50);
    expect(bluish).toBe(0);
  });

  it("paints negative weight blue", () => {
    // synthetic snapshot: a displaced ring of strongly negative weight
    const n = 21;
    const values = Array.from({ length: n }, (_, i) =>
      Array.from({ length: n }, (_, j) => {
        const r2 = (i - 10) ** 2 + (j - 10) ** 2;
        return r2 < 9 ? -0.25 : 0.1;
      }),
    );
    const snap: WignerSnapshot = {
      time: 0,
      condition: "plus_x",
      halfExtent: 6,
      nPoints: n,
      negativityVolume: 0.5,
      modeOccupation: 1,
      values,
    };
    const fake: RunDir = { ...run, snapshots: [snap] };
    const { reddish, bluish } = countColors(embeddedPng(renderWignerGrid([fake]), 0));
    expect(bluish).toBeGreaterThan(5);
    expect(reddish).toBeGreaterThan(5);
  });

  it("supports the unconditional variant and custom limits", () => {
    const svg = renderWignerGrid([run], { condition: "uncond", limit: 0.5 });
    expect(svg).toContain("unconditional");
    expect((svg.match(/<image/g) ?? []).length).toBe(3);
  });

  it("refuses to render when no snapshots match", () => {
    expect(() => renderWignerGrid([{ ...run, snapshots: [] }])).toThrow(
      EmptyInputError,
    );
  });
});

describe("wigner frames", () => {
  const run = loadRunDir(TINYRUN);

  it("names frames by index and lists them in the manifest", () => {
    const { frames, manifest } = renderWignerFrames(run, { scale: 2 });
    expect(frames.map((f) => f.name)).toEqual([
      "frame_0000.png",
      "frame_0001.png",
      "frame_0002.png",
    ]);
    const parsed = JSON.parse(manifest);
    expect(parsed.frames.map((f: { time: number }) => f.time)).toEqual([0, 0.5, 1]);
    expect(parsed.encode_hint).toContain("ffmpeg");
    expect(parsed.color_limit).toBeCloseTo(WIGNER_LIMIT_DEFAULT, 12);
  });

  it("scales frames by integer factors", () => {
    const { frames } = renderWignerFrames(run, { scale: 2 });
    const img = decodePng(frames[0].bytes);
    expect(img.width).toBe(61 * 2);
  });
});

describe("cli", () => {
  it("writes a figure end to end", () => {
    const out = path.join(mkdtempSync(path.join(tmpdir(), "plots-")), "ts.svg");
    const code = main(["--kind", "timeseries", "--in", TINYRUN, "--out", out]);
    expect(code).toBe(0);
    expect(readFileSync(out, "utf-8")).toContain("<svg");
  });

  it("writes numbered frames plus the manifest", () => {
    const out = mkdtempSync(path.join(tmpdir(), "plots-frames-"));
    const code = main(["--kind", "wigner_frames", "--in", TINYRUN, "--out", out]);
    expect(code).toBe(0);
    const names = readdirSync(out).sort();
    expect(names).toContain("frame_0000.png");
    expect(names).toContain("frames.json");
  });

  it("rejects unknown kinds with usage help", () => {
    expect(main(["--kind", "pie", "--in", TINYRUN, "--out", "/tmp/x.svg"])).toBe(2);
  });

  it("maps schema errors to exit code 2", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "plots-bad-"));
    expect(main(["--kind", "timeseries", "--in", dir, "--out", "/tmp/x.svg"])).not.toBe(0);
  });
});
