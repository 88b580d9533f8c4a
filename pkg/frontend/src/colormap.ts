/**
 * Color scales for the figure kinds.
 *
 * The phase-space panels use a red/blue diverging scale that is symmetric
 * about zero: white at 0, red for positive weight, blue for negative.
 * Occupation and sweep heatmaps use a dark-to-bright sequential scale.
 * Everything is plain array math so output bytes are reproducible.
 */

export type Rgb = [number, number, number];

const NAN_GREY: Rgb = [128, 128, 128];

function hex(s: string): Rgb {
  return [
    parseInt(s.slice(1, 3), 16),
    parseInt(s.slice(3, 5), 16),
    parseInt(s.slice(5, 7), 16),
  ];
}

// ColorBrewer RdBu, reordered so t=0 is the blue (negative) end.
const DIVERGING_STOPS: Rgb[] = [
  "#053061",
  "#2166ac",
  "#4393c3",
  "#92c5de",
  "#d1e5f0",
  "#f7f7f7",
  "#fddbc7",
  "#f4a582",
  "#d6604d",
  "#b2182b",
  "#67001f",
].map(hex);

// Inferno-style sequential ramp (dark -> bright).
const SEQUENTIAL_STOPS: Rgb[] = [
  "#000004",
  "#1b0c41",
  "#4a0c6b",
  "#781c6d",
  "#a52c60",
  "#cf4446",
  "#ed6925",
  "#fb9b06",
  "#f7d03c",
  "#fcffa4",
].map(hex);

function interpolate(stops: Rgb[], t: number): Rgb {
  const clamped = Math.max(0, Math.min(1, t));
  const pos = clamped * (stops.length - 1);
  const lo = Math.min(stops.length - 2, Math.floor(pos));
  const frac = pos - lo;
  const a = stops[lo];
  const b = stops[lo + 1];
  return [
    Math.round(a[0] + (b[0] - a[0]) * frac),
    Math.round(a[1] + (b[1] - a[1]) * frac),
    Math.round(a[2] + (b[2] - a[2]) * frac),
  ];
}

/**
 * Diverging map for Wigner weight.  `limit` is the absolute color limit;
 * values are clamped, zero maps to the neutral midpoint exactly.
 */
export function divergingColor(value: number, limit: number): Rgb {
  if (!isFinite(value)) return NAN_GREY;
  return interpolate(DIVERGING_STOPS, 0.5 + value / (2 * limit));
}

/** Sequential map on [min, max] for occupations and sweep summaries. */
export function sequentialColor(value: number, min: number, max: number): Rgb {
  if (!isFinite(value)) return NAN_GREY;
  const span = max - min;
  return interpolate(SEQUENTIAL_STOPS, span > 0 ? (value - min) / span : 0.5);
}

export function rgbCss(c: Rgb): string {
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}
