// Small SVG document builder: panels with linear axes, polylines, embedded
// rasters, gridlines and margin text. Deterministic output.

export interface Scale {
  domain: [number, number];
  range: [number, number];
  map(v: number): number;
}

export function linearScale(domain: [number, number],
                            range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = (r1 - r0) / (d1 - d0 || 1);
  return { domain, range, map: (v: number) => r0 + (v - d0) * k };
}

export function ticks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const start = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12; v += s) {
    out.push(Math.abs(v) < s * 1e-9 ? 0 : Number(v.toPrecision(10)));
  }
  return out;
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  rect(x: number, y: number, w: number, h: number, fill: string,
       stroke = "none"): void {
    this.parts.push(
      `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}"` +
        ` height="${h.toFixed(2)}" fill="${fill}" stroke="${stroke}"/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string,
       width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" ` +
        `x2="${x2.toFixed(2)}" y2="${y2.toFixed(2)}" stroke="${stroke}" ` +
        `stroke-width="${width}"${d}/>`);
  }

  polyline(pts: Array<[number, number]>, stroke: string, width = 1.2,
           dash = ""): void {
    if (pts.length < 2) return;
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    const coords = pts.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`)
      .join(" ");
    this.parts.push(
      `<polyline points="${coords}" fill="none" stroke="${stroke}" ` +
        `stroke-width="${width}"${d}/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(
      `<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${r}" ` +
        `fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, size = 11, anchor = "start",
       cls = ""): void {
    const c = cls ? ` class="${cls}"` : "";
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-size="${size}" ` +
        `font-family="sans-serif" text-anchor="${anchor}"${c}>` +
        `${esc(s)}</text>`);
  }

  image(x: number, y: number, w: number, h: number, pngBase64: string): void {
    this.parts.push(
      `<image x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}"` +
        ` height="${h.toFixed(2)}" preserveAspectRatio="none" ` +
        `href="data:image/png;base64,${pngBase64}"/>`);
  }

  openPanel(name: string): void {
    this.parts.push(`<g class="panel" data-name="${name}">`);
  }

  closePanel(): void {
    this.parts.push("</g>");
  }

  toString(): string {
    return `<svg xmlns="http://www.w3.org/2000/svg" ` +
      `width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="100%" height="100%" fill="white"/>\n` +
      this.parts.join("\n") + "\n</svg>\n";
  }
}

export interface PanelBox {
  x: number;
  y: number;
  w: number;
  h: number;
  sx: Scale;
  sy: Scale;
}

export function panel(svg: Svg, x: number, y: number, w: number, h: number,
                      xDomain: [number, number], yDomain: [number, number],
                      xLabel: string, yLabel: string): PanelBox {
  const sx = linearScale(xDomain, [x, x + w]);
  const sy = linearScale(yDomain, [y + h, y]);
  svg.rect(x, y, w, h, "none", "black");
  for (const t of ticks(xDomain[0], xDomain[1])) {
    const px = sx.map(t);
    svg.line(px, y + h, px, y + h - 4, "black", 0.8);
    svg.text(px, y + h + 13, `${t}`, 9, "middle");
  }
  for (const t of ticks(yDomain[0], yDomain[1])) {
    const py = sy.map(t);
    svg.line(x, py, x + 4, py, "black", 0.8);
    svg.text(x - 5, py + 3, `${t}`, 9, "end");
  }
  svg.text(x + w / 2, y + h + 28, xLabel, 10, "middle");
  svg.text(x - 34, y + h / 2, yLabel, 10, "middle");
  return { x, y, w, h, sx, sy };
}

export function plotLine(svg: Svg, box: PanelBox, xs: number[], ys: number[],
                         stroke: string, width = 1.2, dash = ""): void {
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < xs.length; i++) {
    const y = ys[i];
    if (!Number.isFinite(y) || !Number.isFinite(xs[i])) {
      continue;
    }
    const px = box.sx.map(xs[i]);
    const py = box.sy.map(y);
    if (px < box.x - 1 || px > box.x + box.w + 1) continue;
    pts.push([px, Math.min(Math.max(py, box.y), box.y + box.h)]);
  }
  svg.polyline(pts, stroke, width, dash);
}
