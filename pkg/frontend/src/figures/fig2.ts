// Instantaneous energy distributions with mean/spread and barrier-top
// gridlines, plus an inset zooming into the peak region.
import { numeric, readCsv } from "../csv.js";
import { Manifest, fmtT, requireStages, stageFile } from "../manifest.js";
import { Raster } from "../png.js";
import { Svg, linearScale, panel, plotLine } from "../svg.js";
import { DEFAULT_STYLE, RenderResult, StyleOptions, colorOf,
         provenance } from "./common.js";

const COLORS = ["#1f77b4", "#2ca02c", "#d62728"];

export function renderFig2(man: Manifest,
                           style: StyleOptions = DEFAULT_STYLE): RenderResult {
  requireStages(man, ["spectral1d"]);
  const summary = readCsv(stageFile(man, "spectral1d",
                                    "spectral_summary.csv"));
  const times = numeric(summary, "t");
  const wanted = style.instants ??
    [155.0, 160.0, 165.0].filter((t) => times.includes(t));
  const instants = wanted.length > 0 ? wanted : times.slice(-3);
  const svg = new Svg(640, 430);
  svg.openPanel("energy-distributions");
  const box = panel(svg, 60, 30, 540, 330, [-0.7, 0.1], [0, 1.05],
                    "E (a.u.)", "density (arb.)");
  let peak = 0;
  const curves = instants.map((t) => {
    const c = readCsv(stageFile(man, "spectral1d",
                                `energy_dist_t${fmtT(t)}.csv`));
    const e = numeric(c, "E");
    const d = numeric(c, "density");
    peak = Math.max(peak, ...d.map((v, i) =>
      (e[i] > -0.7 && e[i] < 0.1 ? v : 0)));
    return { t, e, d };
  });
  curves.forEach(({ t, e, d }, k) => {
    plotLine(svg, box, e, d.map((v) => v / peak), COLORS[k % 3], 1.4);
    const row = times.indexOf(t);
    const mean = numeric(summary, "mean")[row];
    const spread = numeric(summary, "spread")[row];
    const vTop = numeric(summary, "v_top")[row];
    for (const x of [mean - spread, mean + spread]) {
      svg.line(box.sx.map(x), box.y, box.sx.map(x), box.y + box.h,
               COLORS[k % 3], 0.7);
    }
    svg.line(box.sx.map(vTop), box.y, box.sx.map(vTop), box.y + box.h,
             COLORS[k % 3], 0.9, "5 3");
    svg.text(70, 46 + 14 * k, `t = ${fmtT(t)}`, 10, "start");
    svg.line(130, 42 + 14 * k, 150, 42 + 14 * k, COLORS[k % 3], 2);
  });
  svg.closePanel();

  // inset: zoom around the peaks with thick mean gridlines
  svg.openPanel("peak-inset");
  const ix = 360;
  const iy = 60;
  const iw = 220;
  const ih = 130;
  svg.rect(ix, iy, iw, ih, "white", "black");
  const sx = linearScale([-0.55, -0.4], [ix, ix + iw]);
  const sy = linearScale([0, 1.05], [iy + ih, iy]);
  curves.forEach(({ t, e, d }, k) => {
    const pts: Array<[number, number]> = [];
    e.forEach((ev, i) => {
      if (ev >= -0.55 && ev <= -0.4) {
        pts.push([sx.map(ev), sy.map(Math.min(d[i] / peak, 1.04))]);
      }
    });
    svg.polyline(pts, COLORS[k % 3], 1.1);
    const row = times.indexOf(t);
    const mean = numeric(summary, "mean")[row];
    svg.line(sx.map(mean), iy, sx.map(mean), iy + ih, COLORS[k % 3], 2.0);
  });
  svg.closePanel();
  provenance(svg, [
    `1D-model energy densities; instants=${instants.map(fmtT).join(",")}; ` +
      `thin lines: mean +/- spread, dashed: model barrier top`,
  ]);

  const raster = new Raster(540, 330);
  curves.forEach(({ e, d }, k) => {
    const rgb: [number, number, number] =
      k === 0 ? [31, 119, 180] : k === 1 ? [44, 160, 44] : [214, 39, 40];
    for (let i = 1; i < e.length; i++) {
      if (e[i] < -0.7 || e[i] > 0.1) continue;
      const x0 = ((e[i - 1] + 0.7) / 0.8) * 539;
      const x1 = ((e[i] + 0.7) / 0.8) * 539;
      const y0 = 329 - Math.min(d[i - 1] / peak, 1) * 320;
      const y1 = 329 - Math.min(d[i] / peak, 1) * 320;
      raster.line(x0, y0, x1, y1, rgb);
    }
  });
  return { svg: svg.toString(),
           rasters: [{ name: "fig2_curves.png", png: raster.encode() }] };
}

export { colorOf };
