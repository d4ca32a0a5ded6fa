// Diverging palette and the signed-log mapping used for Wigner panels.

export type Rgb = [number, number, number];

const NEG: Rgb[] = [
  [5, 48, 97], [33, 102, 172], [67, 147, 195], [146, 197, 222],
  [209, 229, 240],
];
const POS: Rgb[] = [
  [253, 219, 199], [244, 165, 130], [214, 96, 77], [178, 24, 43],
  [103, 0, 31],
];

function lerp(a: Rgb, b: Rgb, f: number): Rgb {
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

function ramp(stops: Rgb[], f: number): Rgb {
  const x = Math.min(Math.max(f, 0), 1) * (stops.length - 1);
  const i = Math.min(Math.floor(x), stops.length - 2);
  return lerp(stops[i], stops[i + 1], x - i);
}

/** Signed log mapping: value -> [-1, 1], clipped below `floor`. */
export function symlog(value: number, peak: number, floor: number): number {
  const a = Math.abs(value);
  if (a <= floor || peak <= floor) return 0;
  const m = Math.log10(a / floor) / Math.log10(peak / floor);
  return Math.sign(value) * Math.min(m, 1);
}

/** Diverging color for a symlog-mapped value in [-1, 1]. */
export function diverging(m: number): Rgb {
  if (m >= 0) return ramp(POS, m);
  return ramp(NEG, 1 + m); // deep blue at m = -1, pale at m -> 0
}

export function cssColor(rgb: Rgb): string {
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}
