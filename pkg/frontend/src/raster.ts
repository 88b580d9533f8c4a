/**
 * Tiny RGBA raster model: figures render value matrices into one pixel per
 * cell and upscale with nearest-neighbour so panels stay crisp and the
 * bytes stay deterministic.
 */

import { Rgb } from "./colormap.js";

export interface Raster {
  width: number;
  height: number;
  /** RGBA, row-major, top row first. */
  data: Uint8ClampedArray;
}

export function makeRaster(width: number, height: number): Raster {
  return { width, height, data: new Uint8ClampedArray(width * height * 4) };
}

/**
 * Paint a value matrix, one cell per pixel.  `values[row][col]` lands at
 * x=col; rows are drawn bottom-up when `flipY` is set (natural for a
 * site/p axis that grows upward).
 */
export function renderCells(
  values: number[][],
  color: (v: number) => Rgb,
  flipY = false,
): Raster {
  const h = values.length;
  const w = h > 0 ? values[0].length : 0;
  const out = makeRaster(w, h);
  for (let row = 0; row < h; row++) {
    const y = flipY ? h - 1 - row : row;
    for (let col = 0; col < w; col++) {
      const [r, g, b] = color(values[row][col]);
      const k = (y * w + col) * 4;
      out.data[k] = r;
      out.data[k + 1] = g;
      out.data[k + 2] = b;
      out.data[k + 3] = 255;
    }
  }
  return out;
}

/** Integer nearest-neighbour upscale. */
export function scaleNearest(src: Raster, fx: number, fy: number): Raster {
  if (fx < 1 || fy < 1 || fx % 1 !== 0 || fy % 1 !== 0) {
    throw new Error(`scale factors must be positive integers, got ${fx}x${fy}`);
  }
  const out = makeRaster(src.width * fx, src.height * fy);
  for (let y = 0; y < out.height; y++) {
    const sy = Math.floor(y / fy);
    for (let x = 0; x < out.width; x++) {
      const sx = Math.floor(x / fx);
      const s = (sy * src.width + sx) * 4;
      const d = (y * out.width + x) * 4;
      out.data[d] = src.data[s];
      out.data[d + 1] = src.data[s + 1];
      out.data[d + 2] = src.data[s + 2];
      out.data[d + 3] = src.data[s + 3];
    }
  }
  return out;
}
