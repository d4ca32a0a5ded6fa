// Phase-space snapshots: per instant, a symlog Wigner map with stationary
// curves, separatrix and the flow momentum on top, and the instantaneous
// on-axis potential with energy levels below (pulse shape inset).
import { readArrayFile } from "../arrayfile.js";
import { numeric, readCsv } from "../csv.js";
import { Manifest, barrierTop, fieldAt, fmtT, requireStages,
         stageFile } from "../manifest.js";
import { Raster } from "../png.js";
import { Svg, panel, plotLine } from "../svg.js";
import { DEFAULT_STYLE, RenderResult, StyleOptions, asWigner,
         drawWignerPanel, linspace, overlayStationary, potentialCurve,
         provenance, wignerRaster } from "./common.js";

export function renderFig1(man: Manifest,
                           style: StyleOptions = DEFAULT_STYLE): RenderResult {
  requireStages(man, ["phase-space"]);
  const instants = style.instants ??
    (man.stages["phase-space"]["wigner_times"] as number[]);
  if (!instants || instants.length === 0) {
    throw new Error("no phase-space snapshot instants available");
  }
  const colW = 290;
  const svg = new Svg(60 + colW * instants.length, 470);
  const rasters: Array<{ name: string; png: Buffer }> = [];
  instants.forEach((t, k) => {
    const wpath = stageFile(man, "phase-space", `wigner_t${fmtT(t)}.asf`);
    const w = asWigner(readArrayFile(wpath));
    const x0 = 50 + colW * k;
    svg.openPanel(`wigner-t${fmtT(t)}`);
    const box = panel(svg, x0, 30, colW - 40, 230,
                      [w.z[0], w.z[w.z.length - 1]],
                      [w.p[0], w.p[w.p.length - 1]],
                      "z (a.u.)", k === 0 ? "p_z (a.u.)" : "");
    drawWignerPanel(svg, box, w, style);
    const zs = linspace(Math.max(w.z[0], 0.5), w.z[w.z.length - 1], 400);
    overlayStationary(svg, box, man.pulse, t, zs);
    const q = readCsv(stageFile(man, "phase-space", `phase_t${fmtT(t)}.csv`));
    const zq = numeric(q, "z");
    const qv = numeric(q, "q");
    const mask = numeric(q, "mask");
    plotLine(svg, box, zq, qv.map((v, i) => (mask[i] > 0.5 ? v : NaN)),
             "black", 1.4);
    svg.text(x0 + 6, 24, `t = ${fmtT(t)}`, 11);
    svg.closePanel();

    svg.openPanel(`potential-t${fmtT(t)}`);
    const zsV = linspace(w.z[0], w.z[w.z.length - 1], 500);
    const v = potentialCurve(man.pulse, t, zsV);
    const lower = panel(svg, x0, 310, colW - 40, 120,
                        [zsV[0], zsV[zsV.length - 1]], [-1.0, 0.3],
                        "z (a.u.)", k === 0 ? "V (a.u.)" : "");
    plotLine(svg, lower, zsV, v, "black", 1.2);
    const { vTop } = barrierTop(man.pulse, t);
    for (const [e, dash] of [[vTop, ""], [-0.5, "4 3"]] as
         Array<[number, string]>) {
      svg.line(lower.sx.map(zsV[0]), lower.sy.map(e),
               lower.sx.map(zsV[zsV.length - 1]), lower.sy.map(e),
               "gray", 0.8, dash);
    }
    // pulse-shape inset with the instant marked
    const ins = { x: x0 + colW - 130, y: 318, w: 80, h: 34 };
    svg.rect(ins.x, ins.y, ins.w, ins.h, "white", "black");
    const tt = linspace(0, man.pulse.N * man.pulse.T, 300);
    const ee = tt.map((x) => fieldAt(man.pulse, x));
    const emax = Math.max(...ee.map(Math.abs)) || 1;
    svg.polyline(tt.map((x, i) => [
      ins.x + (x / (man.pulse.N * man.pulse.T)) * ins.w,
      ins.y + ins.h / 2 - (ee[i] / emax) * (ins.h / 2 - 2),
    ] as [number, number]), "black", 0.7);
    const tx = ins.x + (t / (man.pulse.N * man.pulse.T)) * ins.w;
    svg.line(tx, ins.y, tx, ins.y + ins.h, "red", 0.8);
    svg.closePanel();

    rasters.push({
      name: `fig1_wigner_t${fmtT(t)}.png`,
      png: wignerRaster(w, style.logFloorFraction),
    });
  });
  provenance(svg, [
    `scheme=${style.scheme} logFloor=${style.logFloorFraction} x max|W|`,
    `instants=${instants.map(fmtT).join(",")}; stationary-curve energies ` +
      `relative to the instantaneous barrier top`,
  ]);
  return { svg: svg.toString(), rasters };
}

/** Raster companion: the per-instant heatmaps plus a potential strip. */
export function fig1Raster(man: Manifest, t: number,
                           style: StyleOptions = DEFAULT_STYLE): Buffer {
  const w = asWigner(readArrayFile(
    stageFile(man, "phase-space", `wigner_t${fmtT(t)}.asf`)));
  const r = new Raster(w.z.length, w.p.length + 40);
  const heat = wignerRaster(w, style.logFloorFraction);
  void heat; // heatmap written separately; strip below shows V(z, 0, t)
  const zs = linspace(w.z[0], w.z[w.z.length - 1], w.z.length);
  const v = potentialCurve(man.pulse, t, zs);
  for (let i = 1; i < zs.length; i++) {
    const y0 = 20 - Math.max(-1, Math.min(v[i - 1], 0.3)) * 30;
    const y1 = 20 - Math.max(-1, Math.min(v[i], 0.3)) * 30;
    r.line(i - 1, w.p.length + y0, i, w.p.length + y1, [0, 0, 0]);
  }
  return r.encode();
}
