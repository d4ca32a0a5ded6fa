// Pathway currents (a) and the packet flow momenta (b) at the pulse peak and
// an earlier instant, with tunnel entrance / barrier top / exit gridlines.
import { numeric, readCsv } from "../csv.js";
import { Manifest, barrierTop, fieldAt, fmtT, requireStages,
         stageFile } from "../manifest.js";
import { Raster } from "../png.js";
import { Svg, panel, plotLine } from "../svg.js";
import { DEFAULT_STYLE, RenderResult, StyleOptions,
         provenance } from "./common.js";

const SERIES: Array<[string, string]> = [
  ["j", "black"], ["j_ft", "#d62728"], ["j_ob", "#1f77b4"],
  ["j_st", "#c9279f"],
];

function turningPoints(F: number, e: number):
    { inner: number; outer: number } | null {
  // roots of a z^2 + e z + 1 = 0 on the downfield side, a = |field|
  const disc = e * e - 4 * F;
  if (disc < 0) return null;
  const q = -0.5 * (e - Math.sqrt(disc));
  return { inner: 1 / q, outer: q / F };
}

export function renderFig3(man: Manifest,
                           style: StyleOptions = DEFAULT_STYLE): RenderResult {
  requireStages(man, ["spectral1d"]);
  const summary = readCsv(stageFile(man, "spectral1d",
                                    "spectral_summary.csv"));
  const times = numeric(summary, "t");
  const available = (style.instants ?? [165.0, 155.0])
    .filter((t) => times.includes(t));
  const instants = available.length > 0 ? available : [times[times.length - 1]];
  const svg = new Svg(640, 600);
  const zWin: [number, number] = [0, 14];

  svg.openPanel("currents");
  const boxA = panel(svg, 70, 30, 520, 230, zWin, [-2e-3, 8e-3],
                     "", "j (a.u.)");
  svg.text(75, 45, "(a)", 11);
  svg.closePanel();
  svg.openPanel("flow-momenta");
  const boxB = panel(svg, 70, 320, 520, 230, zWin, [-1.0, 1.5],
                     "z (a.u.)", "q (a.u.)");
  svg.text(75, 335, "(b)", 11);
  svg.closePanel();

  const raster = new Raster(520, 230);
  instants.forEach((t, which) => {
    const dash = which === 0 ? "" : "6 3";
    const cols = readCsv(stageFile(man, "spectral1d",
                                   `currents_t${fmtT(t)}.csv`));
    const z = numeric(cols, "z");
    for (const [name, color] of SERIES) {
      plotLine(svg, boxA, z, numeric(cols, name), color, 1.2, dash);
    }
    for (const [name, color] of SERIES) {
      const j = numeric(cols, name);
      const dens = numeric(cols, name === "j" ? "dens" : "dens_" +
        name.slice(2));
      const floor = Math.max(...dens) * 1e-6;
      const q = j.map((v, i) => (dens[i] > floor ? v / dens[i] : NaN));
      plotLine(svg, boxB, z, q, color, 1.2, dash);
    }
    // gridlines: entrance, barrier top, exit at the instant's mean energy
    const row = times.indexOf(t);
    const mean = numeric(summary, "mean")[row];
    const e = fieldAt(man.pulse, t);
    const tp = turningPoints(Math.abs(e), mean);
    const marks = [barrierTop(man.pulse, t).zTop];
    if (tp) marks.unshift(tp.inner), marks.push(tp.outer);
    for (const zm of marks) {
      for (const box of [boxA, boxB]) {
        svg.line(box.sx.map(Math.abs(zm)), box.y,
                 box.sx.map(Math.abs(zm)), box.y + box.h, "#999999",
                 0.8, dash || "2 2");
      }
    }
    const jj = numeric(cols, "j");
    for (let i = 1; i < z.length; i++) {
      if (z[i] < zWin[0] || z[i] > zWin[1]) continue;
      const px = (x: number) => ((x - zWin[0]) / (zWin[1] - zWin[0])) * 519;
      const py = (y: number) =>
        229 - ((y + 2e-3) / 1e-2) * 229;
      raster.line(px(z[i - 1]), py(jj[i - 1]), px(z[i]), py(jj[i]),
                  which === 0 ? [0, 0, 0] : [120, 120, 120]);
    }
  });
  provenance(svg, [
    `1D-model currents; solid t=${fmtT(instants[0])}` +
      (instants[1] !== undefined ? `, dashed t=${fmtT(instants[1])}` : "") +
      `; gridlines: tunnel entrance / barrier top / exit at <E>(t)`,
  ]);
  return { svg: svg.toString(),
           rasters: [{ name: "fig3_currents.png", png: raster.encode() }] };
}
