/**
 * The five figure kinds over run/sweep directories.
 *
 * timeseries    four-panel qubit + mode-validity summary of one run
 * heatmap       chain occupation vs time with the hopping-scale guide line
 * sweep_map     coupling/exponent landscape of peak conditional negativity
 * wigner_grid   rows of runs x columns of snapshot times, red/blue panels
 * wigner_frames numbered PNG frames (one per snapshot) for movie encoding
 *
 * Everything returns strings/bytes; callers decide where to write them.
 */

import { divergingColor, sequentialColor, rgbCss, Rgb } from "./colormap.js";
import { RunDir, SweepDir, WignerSnapshot, column, EmptyInputError } from "./data.js";
import { encodePng } from "./png.js";
import { renderCells, scaleNearest } from "./raster.js";
import { Svg, Panel, linearScale, niceTicks, fmt, LineOpts } from "./svg.js";

export const WIGNER_LIMIT_DEFAULT = 1 / Math.PI;

const C = {
  blue: "#2166ac",
  red: "#b2182b",
  green: "#2d6a4f",
  orange: "#e08214",
  grey: "#777777",
};

function finitePairs(ts: number[], vs: number[]): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let i = 0; i < ts.length; i++) {
    if (isFinite(vs[i])) out.push([ts[i], vs[i]]);
  }
  return out;
}

function transpose(m: number[][]): number[][] {
  return m[0].map((_, j) => m.map((row) => row[j]));
}

// ---------------------------------------------------------------------------
// timeseries
// ---------------------------------------------------------------------------

export function renderTimeseries(run: RunDir): string {
  const t = column(run.timeseries, "time");
  const svg = new Svg(880, 600);
  svg.text(16, 20, `run ${run.label}`, { size: 13, color: "#000" });

  const panels: Panel[] = [
    { x: 60, y: 40, w: 330, h: 200 },
    { x: 500, y: 40, w: 330, h: 200 },
    { x: 60, y: 330, w: 330, h: 200 },
    { x: 500, y: 330, w: 330, h: 200 },
  ];
  const xTicks = niceTicks(t[0], t[t.length - 1]);

  const drawPanel = (
    p: Panel,
    series: Array<[string, number[], LineOpts]>,
    yDomain: [number, number],
    yLabel: string,
  ) => {
    const xs = linearScale(t[0], t[t.length - 1], p.x, p.x + p.w);
    const ys = linearScale(yDomain[0], yDomain[1], p.y + p.h, p.y);
    svg.frame(p);
    svg.xAxis(p, xs, xTicks, "time");
    svg.yAxis(p, ys, niceTicks(yDomain[0], yDomain[1]), yLabel);
    for (const [, vs, opts] of series) {
      svg.polyline(
        finitePairs(t, vs).map(([tv, v]): [number, number] => [xs(tv), ys(v)]),
        opts,
      );
    }
    svg.legend(
      p.x + 8,
      p.y + 14,
      series.map(([name, , opts]): [string, LineOpts] => [name, opts]),
    );
  };

  drawPanel(
    panels[0],
    [
      ["sigma_x", column(run.timeseries, "sigma_x"), { color: C.blue }],
      ["sigma_y", column(run.timeseries, "sigma_y"), { color: C.green }],
      ["sigma_z", column(run.timeseries, "sigma_z"), { color: C.orange }],
    ],
    [-1.05, 1.05],
    "qubit Bloch components",
  );
  drawPanel(
    panels[1],
    [
      ["purity", column(run.timeseries, "purity"), { color: C.blue }],
      ["entropy", column(run.timeseries, "entropy"), { color: C.red }],
      ["P(+x)", column(run.timeseries, "p_plus"), { color: C.green, dash: "5,3" }],
    ],
    [0, 1.05],
    "purity / entropy / postselection",
  );

  const vncU = column(run.timeseries, "vnc_uncond");
  const vncC = column(run.timeseries, "vnc_cond");
  const vncMax = Math.max(
    0.02,
    ...vncU.filter(isFinite),
    ...vncC.filter(isFinite),
  );
  drawPanel(
    panels[2],
    [
      ["conditional", vncC, { color: C.red }],
      ["unconditional", vncU, { color: C.blue }],
    ],
    [0, vncMax * 1.1],
    "negativity volume",
  );

  // orbital validity: dominance of the leading natural orbital on the left
  // axis, its participation width on the right
  const p = panels[3];
  const frac = column(run.timeseries, "leading_fraction");
  const width = column(run.timeseries, "ipr_width");
  const xs = linearScale(t[0], t[t.length - 1], p.x, p.x + p.w);
  const ysL = linearScale(0, 1.05, p.y + p.h, p.y);
  const wMax = Math.max(2, ...width.filter(isFinite)) * 1.1;
  const ysR = linearScale(0, wMax, p.y + p.h, p.y);
  svg.frame(p);
  svg.xAxis(p, xs, xTicks, "time");
  svg.yAxis(p, ysL, niceTicks(0, 1.05), "leading fraction");
  for (const tick of niceTicks(0, wMax, 4)) {
    const y = ysR(tick);
    svg.line(p.x + p.w, y, p.x + p.w + 4, y, { color: "#444", width: 0.8 });
    svg.text(p.x + p.w + 7, y + 3.5, fmt(tick), { size: 10 });
  }
  svg.text(p.x + p.w + 40, p.y + p.h / 2, "participation width", {
    anchor: "middle",
    rotate: 90,
  });
  svg.polyline(
    finitePairs(t, frac).map(([tv, v]): [number, number] => [xs(tv), ysL(v)]),
    { color: C.blue },
  );
  svg.polyline(
    finitePairs(t, width).map(([tv, v]): [number, number] => [xs(tv), ysR(v)]),
    { color: C.orange },
  );
  svg.legend(p.x + 8, p.y + 14, [
    ["leading fraction", { color: C.blue }],
    ["participation width", { color: C.orange }],
  ]);

  return svg.render();
}

// ---------------------------------------------------------------------------
// occupation heatmap
// ---------------------------------------------------------------------------

export function renderHeatmap(run: RunDir): string {
  const t = column(run.occupations, "time");
  const sites = run.occupations.columns.length - 1;
  // values[site-1][time index], site 1 at the bottom of the panel
  const cells: number[][] = [];
  for (let s = 1; s <= sites; s++) {
    cells.push(column(run.occupations, `site_${s}`));
  }
  const occMax = Math.max(1e-12, ...cells.flat().filter(isFinite));

  const svg = new Svg(780, 440);
  const p: Panel = { x: 70, y: 40, w: 580, h: 340 };
  svg.text(16, 20, `chain occupation, run ${run.label}`, { size: 13, color: "#000" });
  svg.image(
    renderCells(cells, (v) => sequentialColor(v, 0, occMax), true),
    p,
  );
  svg.frame(p);

  const xs = linearScale(t[0], t[t.length - 1], p.x, p.x + p.w);
  const ys = linearScale(0.5, sites + 0.5, p.y + p.h, p.y);
  svg.xAxis(p, xs, niceTicks(t[0], t[t.length - 1]), "time");
  svg.yAxis(p, ys, niceTicks(1, sites, 6).filter((v) => v >= 1), "chain site");

  if (run.guideVelocity !== null && run.guideVelocity > 0) {
    // ballistic guide k = v t, clipped to the panel
    const tExit = Math.min(t[t.length - 1], (sites + 0.5) / run.guideVelocity);
    svg.polyline(
      [
        [xs(0), ys(0.5)],
        [xs(tExit), ys(Math.min(sites + 0.5, run.guideVelocity * tExit))],
      ],
      { color: "#ffffff", width: 1.6, dash: "6,4" },
    );
  }

  svg.colorbar(
    { x: 690, y: p.y, w: 14, h: p.h },
    (u) => sequentialColor(u, 0, 1),
    [0, occMax],
    "site occupation",
  );
  return svg.render();
}

// ---------------------------------------------------------------------------
// sweep landscape
// ---------------------------------------------------------------------------

export function renderSweepMap(sweep: SweepDir): string {
  const { alphas, ss, thetas, rows } = sweep;
  const byKey = new Map(rows.map((r) => [`${r.alpha}|${r.s}|${r.theta}`, r]));
  const ok = rows.filter((r) => r.status === "ok");
  const peakMax = Math.max(1e-6, ...ok.map((r) => r.peakVncCond));

  const cell = 64;
  const pw = ss.length * cell;
  const ph = alphas.length * cell;
  const gap = 46;
  const svg = new Svg(80 + thetas.length * (pw + gap) + 60, ph + 110);
  svg.text(16, 20, "peak conditional negativity volume", { size: 13, color: "#000" });

  thetas.forEach((theta, ip) => {
    const p: Panel = { x: 70 + ip * (pw + gap), y: 46, w: pw, h: ph };
    svg.text(p.x + pw / 2, p.y - 8, `theta = ${fmt(theta)}`, { anchor: "middle" });
    alphas.forEach((alpha, ia) => {
      ss.forEach((s, is_) => {
        const x = p.x + is_ * cell;
        const y = p.y + ph - (ia + 1) * cell; // alpha grows upward
        const row = byKey.get(`${alpha}|${s}|${theta}`);
        if (!row || row.status !== "ok") {
          svg.rect(x, y, cell, cell, "#bbbbbb", ' stroke="#fff" stroke-width="1"');
          svg.text(x + cell / 2, y + cell / 2 + 4, "failed", {
            anchor: "middle",
            size: 9,
            color: "#600",
          });
          return;
        }
        const rgb = sequentialColor(row.peakVncCond, 0, peakMax);
        svg.rect(x, y, cell, cell, rgbCss(rgb), ' stroke="#fff" stroke-width="1"');
        const lum = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
        svg.text(x + cell / 2, y + cell / 2 + 3, row.peakVncCond.toPrecision(2), {
          anchor: "middle",
          size: 9,
          color: lum < 140 ? "#eee" : "#222",
        });
      });
    });
    svg.frame(p);
    ss.forEach((s, is_) =>
      svg.text(p.x + (is_ + 0.5) * cell, p.y + ph + 14, fmt(s), {
        anchor: "middle",
        size: 10,
      }),
    );
    svg.text(p.x + pw / 2, p.y + ph + 30, "spectral exponent s", { anchor: "middle" });
    alphas.forEach((alpha, ia) =>
      svg.text(p.x - 6, p.y + ph - (ia + 0.5) * cell + 3.5, fmt(alpha), {
        anchor: "end",
        size: 10,
      }),
    );
    if (ip === 0) {
      svg.text(p.x - 44, p.y + ph / 2, "coupling alpha", { anchor: "middle", rotate: -90 });
    }
  });

  svg.colorbar(
    { x: 80 + thetas.length * (pw + gap) - gap + 14, y: 46, w: 14, h: ph },
    (u) => sequentialColor(u, 0, 1),
    [0, peakMax],
  );
  return svg.render();
}

// ---------------------------------------------------------------------------
// phase-space panels
// ---------------------------------------------------------------------------

export interface WignerOpts {
  condition?: string; // "plus_x" (default) or "uncond"
  limit?: number; // absolute color limit, default 1/pi
  scale?: number; // integer pixel upscale per cell
}

function snapshotRaster(snap: WignerSnapshot, limit: number, scale: number) {
  // values[i][j] has q along rows; transpose so q runs along x, flip so p
  // grows upward
  const img = renderCells(
    transpose(snap.values),
    (v) => divergingColor(v, limit),
    true,
  );
  return scale > 1 ? scaleNearest(img, scale, scale) : img;
}

export function renderWignerGrid(runs: RunDir[], opts: WignerOpts = {}): string {
  const condition = opts.condition ?? "plus_x";
  const limit = opts.limit ?? WIGNER_LIMIT_DEFAULT;
  const perRun = runs.map((r) => r.snapshots.filter((s) => s.condition === condition));
  if (perRun.every((snaps) => snaps.length === 0)) {
    throw new EmptyInputError(`no '${condition}' snapshots in the inputs`);
  }
  const times = [...new Set(perRun.flat().map((s) => s.time))].sort((a, b) => a - b);

  const panel = 150;
  const gap = 12;
  const left = 96;
  const top = 56;
  const W = left + times.length * (panel + gap) + 74;
  const H = top + runs.length * (panel + gap) + 46;
  const svg = new Svg(W, H);
  svg.text(
    16,
    20,
    `phase-space distribution of the leading mode (${condition === "plus_x" ? "+x conditioned" : "unconditional"})`,
    { size: 13, color: "#000" },
  );

  times.forEach((tv, j) => {
    svg.text(left + j * (panel + gap) + panel / 2, top - 8, `t = ${fmt(tv)}`, {
      anchor: "middle",
    });
  });

  runs.forEach((run, i) => {
    const y0 = top + i * (panel + gap);
    svg.text(left - 10, y0 + panel / 2, run.label, { anchor: "end", size: 10 });
    const snaps = perRun[i];
    times.forEach((tv, j) => {
      const p: Panel = { x: left + j * (panel + gap), y: y0, w: panel, h: panel };
      const snap = snaps.find((s) => s.time === tv);
      if (!snap) {
        svg.rect(p.x, p.y, p.w, p.h, "#eeeeee", ' stroke="#999" stroke-dasharray="3,3"');
        return;
      }
      const scale = Math.max(1, Math.round(panel / snap.nPoints));
      svg.image(snapshotRaster(snap, limit, scale), p);
      svg.frame(p);
      svg.text(p.x + 4, p.y + p.h - 5, `V=${snap.negativityVolume.toFixed(3)}`, {
        size: 9,
        color: "#333",
      });
    });
  });

  // corner quadrature labels + shared colorbar
  const lastY = top + runs.length * (panel + gap) - gap;
  svg.text(left + panel / 2, lastY + 14, "q", { anchor: "middle", size: 10 });
  svg.text(left - 10, top + panel / 2 + 40, "p", { anchor: "end", size: 10 });
  svg.colorbar(
    { x: W - 60, y: top, w: 14, h: lastY - top },
    (u) => divergingColor((u - 0.5) * 2 * limit, limit),
    [-limit, limit],
    "Wigner weight",
  );
  return svg.render();
}

export interface Frame {
  name: string;
  bytes: Buffer;
  time: number;
}

export function renderWignerFrames(
  run: RunDir,
  opts: WignerOpts = {},
): { frames: Frame[]; manifest: string } {
  const condition = opts.condition ?? "plus_x";
  const limit = opts.limit ?? WIGNER_LIMIT_DEFAULT;
  const scale = opts.scale ?? 4;
  const snaps = run.snapshots.filter((s) => s.condition === condition);
  if (snaps.length === 0) {
    throw new EmptyInputError(`no '${condition}' snapshots in ${run.label}`);
  }
  const frames = snaps.map((snap, i) => ({
    name: `frame_${String(i).padStart(4, "0")}.png`,
    bytes: encodePng(snapshotRaster(snap, limit, scale)),
    time: snap.time,
  }));
  const manifest =
    JSON.stringify(
      {
        run: run.label,
        condition,
        color_limit: limit,
        frames: frames.map((f) => ({ file: f.name, time: f.time })),
        encode_hint:
          "ffmpeg -framerate 8 -i frame_%04d.png -pix_fmt yuv420p movie.mp4",
      },
      null,
      2,
    ) + "\n";
  return { frames, manifest };
}
