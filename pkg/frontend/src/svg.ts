/**
 * Hand-built SVG scaffolding: panels, axes, polylines and embedded rasters.
 *
 * Coordinates are emitted with fixed two-decimal precision and nothing here
 * consults clocks or randomness, so a given figure is byte-identical across
 * renders.
 */

import { Rgb, rgbCss } from "./colormap.js";
import { Raster } from "./raster.js";
import { encodePng } from "./png.js";

export interface Panel {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const px = (v: number) => v.toFixed(2);

/** Trimmed tick label: 0.30000000000000004 -> "0.3". */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const r = Math.round(v * 1e6) / 1e6;
  return String(r);
}

export function niceTicks(min: number, max: number, count = 5): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export type Scale = (v: number) => number;

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export interface LineOpts {
  color: string;
  width?: number;
  dash?: string;
  opacity?: number;
}

export class Svg {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
    );
  }

  raw(s: string): void {
    this.parts.push(s);
  }

  text(
    x: number,
    y: number,
    s: string,
    opts: { size?: number; anchor?: string; color?: string; rotate?: number } = {},
  ): void {
    const { size = 11, anchor = "start", color = "#222", rotate } = opts;
    const tf = rotate !== undefined ? ` transform="rotate(${rotate} ${px(x)} ${px(y)})"` : "";
    this.parts.push(
      `<text x="${px(x)}" y="${px(y)}" font-size="${size}" text-anchor="${anchor}" ` +
        `fill="${color}"${tf}>${esc(s)}</text>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, opts: LineOpts): void {
    this.parts.push(
      `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" ` +
        this.stroke(opts) +
        "/>",
    );
  }

  /** Polyline split at non-finite points, so NaN gaps stay gaps. */
  polyline(pts: Array<[number, number]>, opts: LineOpts): void {
    let run: string[] = [];
    const flush = () => {
      if (run.length > 1) {
        this.parts.push(`<polyline points="${run.join(" ")}" fill="none" ${this.stroke(opts)}/>`);
      } else if (run.length === 1) {
        const [x, y] = run[0].split(",");
        this.parts.push(
          `<circle cx="${x}" cy="${y}" r="${(opts.width ?? 1) + 0.6}" fill="${opts.color}"/>`,
        );
      }
      run = [];
    };
    for (const [x, y] of pts) {
      if (isFinite(x) && isFinite(y)) run.push(`${px(x)},${px(y)}`);
      else flush();
    }
    flush();
  }

  rect(x: number, y: number, w: number, h: number, fill: string, strokeCss = ""): void {
    this.parts.push(
      `<rect x="${px(x)}" y="${px(y)}" width="${px(w)}" height="${px(h)}" fill="${fill}"${strokeCss}/>`,
    );
  }

  /** Embed a raster as a base64 PNG stretched over the panel. */
  image(raster: Raster, panel: Panel): void {
    const uri = `data:image/png;base64,${encodePng(raster).toString("base64")}`;
    this.parts.push(
      `<image x="${px(panel.x)}" y="${px(panel.y)}" width="${px(panel.w)}" ` +
        `height="${px(panel.h)}" preserveAspectRatio="none" ` +
        `image-rendering="pixelated" href="${uri}"/>`,
    );
  }

  frame(p: Panel): void {
    this.rect(p.x, p.y, p.w, p.h, "none", ' stroke="#444" stroke-width="0.8"');
  }

  xAxis(p: Panel, scale: Scale, ticks: number[], label?: string): void {
    for (const t of ticks) {
      const x = scale(t);
      this.line(x, p.y + p.h, x, p.y + p.h + 4, { color: "#444", width: 0.8 });
      this.text(x, p.y + p.h + 15, fmt(t), { size: 10, anchor: "middle" });
    }
    if (label) {
      this.text(p.x + p.w / 2, p.y + p.h + 30, label, { anchor: "middle" });
    }
  }

  yAxis(p: Panel, scale: Scale, ticks: number[], label?: string): void {
    for (const t of ticks) {
      const y = scale(t);
      this.line(p.x - 4, y, p.x, y, { color: "#444", width: 0.8 });
      this.text(p.x - 7, y + 3.5, fmt(t), { size: 10, anchor: "end" });
    }
    if (label) {
      this.text(p.x - 38, p.y + p.h / 2, label, { anchor: "middle", rotate: -90 });
    }
  }

  legend(x: number, y: number, entries: Array<[string, LineOpts]>): void {
    let yy = y;
    for (const [name, opts] of entries) {
      this.line(x, yy - 3.5, x + 18, yy - 3.5, opts);
      this.text(x + 23, yy, name, { size: 10 });
      yy += 14;
    }
  }

  /** Vertical colorbar with tick labels on the right. */
  colorbar(
    p: Panel,
    color: (t: number) => Rgb,
    domain: [number, number],
    label?: string,
  ): void {
    const steps = 64;
    for (let i = 0; i < steps; i++) {
      const t = (i + 0.5) / steps;
      const y = p.y + p.h - ((i + 1) / steps) * p.h;
      this.rect(p.x, y, p.w, p.h / steps + 0.5, rgbCss(color(t)));
    }
    this.frame(p);
    const scale = linearScale(domain[0], domain[1], p.y + p.h, p.y);
    for (const t of niceTicks(domain[0], domain[1], 4)) {
      const y = scale(t);
      this.line(p.x + p.w, y, p.x + p.w + 3, y, { color: "#444", width: 0.8 });
      this.text(p.x + p.w + 6, y + 3.5, fmt(t), { size: 9 });
    }
    if (label) {
      this.text(p.x + p.w + 34, p.y + p.h / 2, label, { anchor: "middle", rotate: 90, size: 10 });
    }
  }

  private stroke(opts: LineOpts): string {
    const { color, width = 1.2, dash, opacity } = opts;
    let s = `stroke="${color}" stroke-width="${width}"`;
    if (dash) s += ` stroke-dasharray="${dash}"`;
    if (opacity !== undefined) s += ` stroke-opacity="${opacity}"`;
    return s;
  }

  render(): string {
    return [...this.parts, "</svg>"].join("\n") + "\n";
  }
}
