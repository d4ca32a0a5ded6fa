// Classical escape trajectories in phase space, with snapshots of the flow
// momentum and the momentary classical states, plus an inset around the
// start points.
import { numeric, readCsv } from "../csv.js";
import { Manifest, fmtT, requireStages, stageFile } from "../manifest.js";
import { Raster } from "../png.js";
import { Svg, linearScale, panel, plotLine } from "../svg.js";
import { DEFAULT_STYLE, RenderResult, StyleOptions, colorOf, linspace,
         provenance } from "./common.js";

const SNAP_INSTANTS = [157.0, 185.0, 210.0, 230.0];

export function renderFig4(man: Manifest,
                           style: StyleOptions = DEFAULT_STYLE): RenderResult {
  requireStages(man, ["trajectories", "phase-space"]);
  const summary = readCsv(stageFile(man, "trajectories",
                                    "ensemble_summary.csv"));
  const tsAll = numeric(summary, "t_s");
  const outcomes = summary.columns["outcome"] as string[];
  const seeded = tsAll.filter((_, i) => !outcomes[i].startsWith("no-seed"));
  const svg = new Svg(700, 480);
  svg.openPanel("trajectories");
  const box = panel(svg, 60, 30, 600, 380, [0, 130], [-0.8, 1.2],
                    "z (a.u.)", "p_z (a.u.)");
  const qTimes = (man.stages["phase-space"]["q_times"] as number[]) ?? [];
  for (const t of SNAP_INSTANTS) {
    if (!qTimes.includes(t)) continue;
    const cols = readCsv(stageFile(man, "phase-space",
                                   `phase_t${fmtT(t)}.csv`));
    const z = numeric(cols, "z");
    const q = numeric(cols, "q");
    const mask = numeric(cols, "mask");
    plotLine(svg, box, z,
             q.map((v, i) => (mask[i] > 0.5 && z[i] > 0.5 ? v : NaN)),
             "black", 1.0);
  }
  const starts: Array<[number, number, string]> = [];
  seeded.forEach((ts, k) => {
    const color = colorOf(k);
    const tr = readCsv(stageFile(man, "trajectories",
                                 `traj_ts${fmtT(ts)}.csv`));
    const t = numeric(tr, "t");
    const z = numeric(tr, "z");
    const p = numeric(tr, "p");
    plotLine(svg, box, z, p, color, 1.2, "5 3");
    starts.push([z[0], p[0], color]);
    for (const tc of SNAP_INSTANTS) {
      if (tc < t[0] || tc > t[t.length - 1]) continue;
      let best = 0;
      t.forEach((tv, i) => {
        if (Math.abs(tv - tc) < Math.abs(t[best] - tc)) best = i;
      });
      svg.circle(box.sx.map(z[best]), box.sy.map(p[best]), 3.5, color);
    }
    svg.text(566, 50 + 14 * k, `t_s = ${fmtT(ts)}`, 10, "start");
    svg.line(630, 46 + 14 * k, 650, 46 + 14 * k, color, 2);
  });
  svg.closePanel();

  // inset: start-point neighborhood
  svg.openPanel("start-inset");
  const ins = { x: 95, y: 55, w: 170, h: 120 };
  svg.rect(ins.x, ins.y, ins.w, ins.h, "white", "black");
  const zLo = Math.min(...starts.map((s) => s[0])) - 1.0;
  const zHi = Math.max(...starts.map((s) => s[0])) + 1.0;
  const pLo = Math.min(...starts.map((s) => s[1])) - 0.08;
  const pHi = Math.max(...starts.map((s) => s[1])) + 0.08;
  const sx = linearScale([zLo, zHi], [ins.x, ins.x + ins.w]);
  const sy = linearScale([pLo, pHi], [ins.y + ins.h, ins.y]);
  for (const [z0, p0, color] of starts) {
    svg.circle(sx.map(z0), sy.map(p0), 3, color);
  }
  svg.text(ins.x + 4, ins.y + 12, "start points", 9);
  svg.closePanel();
  provenance(svg, [
    `dashed: classical trajectories from the flow-momentum seeding; ` +
      `black: q(z, t) at t=${SNAP_INSTANTS.map(fmtT).join(",")}; ` +
      `dots: momentary classical states`,
  ]);

  const raster = new Raster(600, 380);
  seeded.forEach((ts, k) => {
    const tr = readCsv(stageFile(man, "trajectories",
                                 `traj_ts${fmtT(ts)}.csv`));
    const z = numeric(tr, "z");
    const p = numeric(tr, "p");
    const rgb: [number, number, number] = k % 2 ? [40, 40, 160] :
      [160, 40, 40];
    for (let i = 1; i < z.length; i++) {
      const px = (x: number) => (x / 130) * 599;
      const py = (y: number) => 379 - ((y + 0.8) / 2.0) * 379;
      raster.line(px(z[i - 1]), py(p[i - 1]), px(z[i]), py(p[i]), rgb);
    }
  });
  return { svg: svg.toString(),
           rasters: [{ name: "fig4_trajectories.png",
                       png: raster.encode() }] };
}

export { linspace };
