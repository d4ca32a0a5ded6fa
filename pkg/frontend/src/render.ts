import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { Manifest } from "./manifest.js";
import { DEFAULT_STYLE, RenderResult, StyleOptions } from "./figures/common.js";
import { renderFig1 } from "./figures/fig1.js";
import { renderFig2 } from "./figures/fig2.js";
import { renderFig3 } from "./figures/fig3.js";
import { renderFig4 } from "./figures/fig4.js";
import { renderFig5 } from "./figures/fig5.js";
import { renderTable1 } from "./figures/table1.js";

export const FIGURE_IDS =
  ["fig1", "fig2", "fig3", "fig4", "fig5", "table1"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export function render(figure: FigureId, man: Manifest, outDir: string,
                       style: StyleOptions = DEFAULT_STYLE): string[] {
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const emit = (result: RenderResult) => {
    const svgPath = join(outDir, `${figure}.svg`);
    writeFileSync(svgPath, result.svg);
    written.push(svgPath);
    for (const { name, png } of result.rasters) {
      const p = join(outDir, name);
      writeFileSync(p, png);
      written.push(p);
    }
  };
  switch (figure) {
    case "fig1":
      emit(renderFig1(man, style));
      break;
    case "fig2":
      emit(renderFig2(man, style));
      break;
    case "fig3":
      emit(renderFig3(man, style));
      break;
    case "fig4":
      emit(renderFig4(man, style));
      break;
    case "fig5":
      emit(renderFig5(man, style));
      break;
    case "table1": {
      const { text, html } = renderTable1(man);
      const tPath = join(outDir, "table1.txt");
      const hPath = join(outDir, "table1.html");
      writeFileSync(tPath, text);
      writeFileSync(hPath, html);
      written.push(tPath, hPath);
      break;
    }
  }
  return written;
}
