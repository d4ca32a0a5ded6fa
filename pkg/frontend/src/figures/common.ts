import { ArrayFile, axisValues } from "../arrayfile.js";
import { cssColor, diverging, symlog } from "../color.js";
import { encodePng } from "../png.js";
import { PanelBox, Svg, plotLine } from "../svg.js";
import { Manifest, PulseInfo, barrierTop, onAxisPotential,
         stationaryCurve } from "../manifest.js";

export interface StyleOptions {
  logFloorFraction: number; // color floor as a fraction of max |W|
  scheme: string;
  instants?: number[];
}

export const DEFAULT_STYLE: StyleOptions = {
  logFloorFraction: 1e-6,
  scheme: "diverging-symlog",
};

export interface WignerField {
  z: number[];
  p: number[];
  values: Float64Array; // row-major (z, p)
  peak: number;
}

export function asWigner(file: ArrayFile): WignerField {
  if (file.shape.length !== 2 || file.complex) {
    throw new Error("expected a real rank-2 phase-space array");
  }
  let peak = 0;
  for (const v of file.data) peak = Math.max(peak, Math.abs(v));
  return {
    z: axisValues(file.axes[0]),
    p: axisValues(file.axes[1]),
    values: file.data,
    peak,
  };
}

/** Level-quantized symlog raster of a Wigner field (filled-contour look). */
export function wignerRaster(w: WignerField, floorFrac: number,
                             levels = 16): Buffer {
  const nz = w.z.length;
  const np = w.p.length;
  const floor = floorFrac * w.peak;
  const rgba = new Uint8Array(nz * np * 4);
  for (let ip = 0; ip < np; ip++) {
    for (let iz = 0; iz < nz; iz++) {
      // image rows run top-down in p
      const v = w.values[iz * np + (np - 1 - ip)];
      let m = symlog(v, w.peak, floor);
      m = Math.round(m * levels) / levels;
      const [r, g, b] = diverging(m);
      const k = (ip * nz + iz) * 4;
      rgba[k] = r;
      rgba[k + 1] = g;
      rgba[k + 2] = b;
      rgba[k + 3] = 255;
    }
  }
  return encodePng(nz, np, rgba);
}

export function drawWignerPanel(svg: Svg, box: PanelBox, w: WignerField,
                                style: StyleOptions): void {
  const png = wignerRaster(w, style.logFloorFraction);
  svg.image(box.x, box.y, box.w, box.h, png.toString("base64"));
  svg.rect(box.x, box.y, box.w, box.h, "none", "black");
}

/** Gray stationary curves + separatrix for one instant. */
export function overlayStationary(svg: Svg, box: PanelBox, pulse: PulseInfo,
                                  t: number, zs: number[]): number[] {
  const { vTop } = barrierTop(pulse, t);
  const energies = [vTop - 0.08, vTop - 0.03, vTop + 0.05, vTop + 0.15];
  const dashes = ["4 3", "2 2", "5 2", "1 2"];
  energies.forEach((e, k) => {
    const ps = stationaryCurve(pulse, t, e, zs);
    plotLine(svg, box, zs, ps, "gray", 0.8, dashes[k]);
    plotLine(svg, box, zs, ps.map((p) => -p), "gray", 0.8, dashes[k]);
  });
  const sep = stationaryCurve(pulse, t, vTop, zs);
  plotLine(svg, box, zs, sep, "#707070", 1.2);
  plotLine(svg, box, zs, sep.map((p) => -p), "#707070", 1.2);
  return energies.concat([vTop]);
}

export function potentialCurve(pulse: PulseInfo, t: number,
                               zs: number[]): number[] {
  return zs.map((z) => onAxisPotential(pulse, z, t));
}

export function provenance(svg: Svg, lines: string[]): void {
  lines.forEach((s, i) => {
    svg.text(8, svg.height - 8 - 12 * (lines.length - 1 - i), s, 9,
             "start", "provenance");
  });
}

export function colorOf(idx: number): string {
  const palette = ["#7b2d8b", "#2e8b57", "#d62728", "#1f3f9f", "#27b3c9",
                   "#c9279f"];
  return palette[idx % palette.length];
}

export function linspace(a: number, b: number, n: number): number[] {
  const out = new Array<number>(n);
  for (let i = 0; i < n; i++) out[i] = a + ((b - a) * i) / (n - 1);
  return out;
}

export interface RenderResult {
  svg: string;
  rasters: Array<{ name: string; png: Buffer }>;
}

export function manifestPulse(man: Manifest): PulseInfo {
  return man.pulse;
}
