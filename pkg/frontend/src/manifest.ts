import { existsSync, readFileSync } from "node:fs";
import { dirname, join } from "node:path";

export interface PulseInfo {
  F: number;
  T: number;
  N: number;
  phi: number;
}

export interface Manifest {
  root: string;
  pulse: PulseInfo;
  grid: Record<string, number>;
  stages: Record<string, StageEntry>;
}

export interface StageEntry {
  files: Record<string, string>;
  [key: string]: unknown;
}

export function loadManifest(path: string): Manifest {
  const raw = JSON.parse(readFileSync(path, "utf8"));
  if (raw.schema !== "attoscope-manifest@1") {
    throw new Error(`${path}: unsupported manifest schema ${raw.schema}`);
  }
  return {
    root: dirname(path),
    pulse: raw.pulse,
    grid: raw.grid,
    stages: raw.stages ?? {},
  };
}

/** Resolve required stages, throwing one error that lists every gap. */
export function requireStages(man: Manifest, names: string[]): void {
  const missing = names.filter((n) => !(n in man.stages));
  if (missing.length > 0) {
    throw new Error(
      `manifest is missing required stages: ${missing.join(", ")} ` +
        `(run the corresponding pipeline stages first)`);
  }
}

export function stageFile(man: Manifest, stage: string, rel: string): string {
  const entry = man.stages[stage];
  if (!entry || !(rel in entry.files)) {
    throw new Error(
      `stage '${stage}' does not provide '${rel}'; ` +
        `available: ${entry ? Object.keys(entry.files).join(", ") : "none"}`);
  }
  const path = join(man.root, rel);
  if (!existsSync(path)) {
    throw new Error(`manifest lists ${rel} but the file is absent`);
  }
  return path;
}

export function stageMeta<T>(man: Manifest, stage: string, key: string): T {
  const entry = man.stages[stage];
  if (!entry || !(key in entry)) {
    throw new Error(`stage '${stage}' lacks metadata '${key}'`);
  }
  return entry[key] as T;
}

export const fmtT = (t: number): string => {
  // mirror python's "%g" for the file-name time tags
  const s = `${t}`;
  return s.endsWith(".0") ? s.slice(0, -2) : s;
};

// ---- shared physics helpers (parameters come from the manifest) ----------

export function fieldAt(p: PulseInfo, t: number): number {
  if (t <= 0 || t >= p.N * p.T) return 0;
  const env = Math.sin((Math.PI * t) / (p.N * p.T)) ** 2;
  return p.F * env * Math.cos((2 * Math.PI * t) / p.T + p.phi);
}

export function onAxisPotential(p: PulseInfo, z: number, t: number): number {
  return -1 / Math.abs(z) + fieldAt(p, t) * z;
}

export function barrierTop(p: PulseInfo, t: number):
    { zTop: number; vTop: number } {
  const e = fieldAt(p, t);
  const a = Math.abs(e);
  const s = e > 0 ? -1 : 1;
  return { zTop: s / Math.sqrt(a), vTop: -2 * Math.sqrt(a) };
}

/** Stationary curve p(z; E) over a z range; NaN where forbidden. */
export function stationaryCurve(p: PulseInfo, t: number, energy: number,
                                zs: number[]): number[] {
  return zs.map((z) => {
    const arg = 2 * (energy - onAxisPotential(p, z, t));
    return arg >= 0 ? Math.sqrt(arg) : NaN;
  });
}
