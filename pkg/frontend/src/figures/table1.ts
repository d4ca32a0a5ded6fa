// Starting-time reconstruction table, rendered as plain text and HTML.
import { readCsv } from "../csv.js";
import { Manifest, requireStages, stageFile } from "../manifest.js";

export interface TableResult {
  text: string;
  html: string;
}

export function renderTable1(man: Manifest): TableResult {
  requireStages(man, ["reconstruct"]);
  const cols = readCsv(stageFile(man, "reconstruct", "table1.csv"));
  const ts = cols.columns["t_s"] as number[];
  const pd = cols.columns["p_d"] as number[];
  const tsr = cols.columns["t_s_r"] as number[];
  const status = cols.columns["status"] as string[];
  const fmt = (v: number, d = 2) => (Number.isNaN(v) ? "--" : v.toFixed(d));
  const header = ["t_s", "p_d", "t_s^R", "status"];
  const rows = ts.map((t, i) =>
    [fmt(t), fmt(pd[i], 4), fmt(tsr[i]), status[i]]);
  const widths = header.map((h, j) =>
    Math.max(h.length, ...rows.map((r) => r[j].length)));
  const fmtRow = (r: string[]) =>
    r.map((c, j) => c.padStart(widths[j])).join("  ");
  const text = [fmtRow(header),
                widths.map((w) => "-".repeat(w)).join("  "),
                ...rows.map(fmtRow)].join("\n") + "\n";
  const html = [
    "<table>",
    "<thead><tr>" + header.map((h) => `<th>${h}</th>`).join("") +
      "</tr></thead>",
    "<tbody>",
    ...rows.map((r) =>
      "<tr>" + r.map((c) => `<td>${c}</td>`).join("") + "</tr>"),
    "</tbody>",
    "</table>",
  ].join("\n") + "\n";
  return { text, html };
}
