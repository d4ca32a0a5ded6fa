// Backward-propagated escape packet: phase-space maps with the flow momentum
// and classical states (left), momentum distributions with the classical
// momenta marked (right).
import { readArrayFile } from "../arrayfile.js";
import { numeric, readCsv } from "../csv.js";
import { Manifest, fmtT, requireStages, stageFile } from "../manifest.js";
import { Svg, panel, plotLine } from "../svg.js";
import { DEFAULT_STYLE, RenderResult, StyleOptions, asWigner, colorOf,
         drawWignerPanel, linspace, overlayStationary, provenance,
         wignerRaster } from "./common.js";

export function renderFig5(man: Manifest,
                           style: StyleOptions = DEFAULT_STYLE): RenderResult {
  requireStages(man, ["pmpe"]);
  const instants = style.instants ??
    (man.stages["pmpe"]["times"] as number[]);
  const rowH = 270;
  const svg = new Svg(760, 40 + rowH * instants.length);
  const rasters: Array<{ name: string; png: Buffer }> = [];
  instants.forEach((t, k) => {
    const y0 = 30 + rowH * k;
    const w = asWigner(readArrayFile(
      stageFile(man, "pmpe", `pmpe_wigner_t${fmtT(t)}.asf`)));
    svg.openPanel(`pmpe-wigner-t${fmtT(t)}`);
    const left = panel(svg, 60, y0, 420, rowH - 60,
                       [0, Math.min(120, w.z[w.z.length - 1])], [-0.6, 1.4],
                       "z (a.u.)", "p_z (a.u.)");
    drawWignerPanel(svg, left, {
      ...w,
    }, style);
    const zs = linspace(0.5, 120, 400);
    overlayStationary(svg, left, man.pulse, t, zs);
    const qc = readCsv(stageFile(man, "pmpe", `pmpe_q_t${fmtT(t)}.csv`));
    const zq = numeric(qc, "z");
    const qv = numeric(qc, "q");
    const mask = numeric(qc, "mask");
    plotLine(svg, left, zq,
             qv.map((v, i) => (mask[i] > 0.5 && zq[i] > 0 ? v : NaN)),
             "black", 1.3);
    svg.text(66, y0 - 6, `t = ${fmtT(t)}`, 11);
    svg.closePanel();

    svg.openPanel(`pmpe-momentum-t${fmtT(t)}`);
    const mc = readCsv(stageFile(man, "pmpe", `pmpe_momentum_t${fmtT(t)}.csv`));
    const p = numeric(mc, "p");
    const dens = numeric(mc, "density");
    const peak = Math.max(...dens) || 1;
    const right = panel(svg, 540, y0, 190, rowH - 60, [-0.6, 1.4], [0, 1.05],
                        "p_z (a.u.)", "n(p)");
    plotLine(svg, right, p, dens.map((d) => d / peak), "#333333", 1.2);
    svg.closePanel();

    // classical momentary states on both panels
    let dots: { ts: number[]; z: number[]; p: number[] } | null = null;
    try {
      const dc = readCsv(stageFile(man, "pmpe", `pmpe_dots_t${fmtT(t)}.csv`));
      dots = { ts: numeric(dc, "t_s"), z: numeric(dc, "z"),
               p: numeric(dc, "p") };
    } catch {
      dots = null; // trajectory seeding unavailable for this run
    }
    if (dots) {
      dots.ts.forEach((ts, i) => {
        const color = colorOf(i);
        svg.circle(left.sx.map(dots!.z[i]), left.sy.map(dots!.p[i]), 3.5,
                   color);
        svg.line(right.sx.map(dots!.p[i]), right.y,
                 right.sx.map(dots!.p[i]), right.y + right.h, color, 1.2);
        svg.text(right.x + right.w - 4, right.y + 14 + 12 * i,
                 `t_s=${fmtT(ts)}`, 9, "end");
      });
    }
    rasters.push({ name: `fig5_wigner_t${fmtT(t)}.png`,
                   png: wignerRaster(w, style.logFloorFraction) });
  });
  provenance(svg, [
    `escape-packet phase space, scheme=${style.scheme} ` +
      `logFloor=${style.logFloorFraction} x max|W|; dots/lines: classical ` +
      `states and their momenta`,
  ]);
  return { svg: svg.toString(), rasters };
}
