// Builds a miniature but complete output tree + manifest for renderer tests.
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export function writeAsf(path: string, shape: number[],
                         axes: Array<{ name: string; min: number;
                                       step: number }>,
                         values: number[]): void {
  const rank = shape.length;
  const head = Buffer.alloc(8 + rank * 40); // u64 + 16-byte name + 2 f64

  head.write("ASF1", 0, "latin1");
  head.writeUInt8(0, 4); // real payload
  head.writeUInt8(rank, 5);
  head.writeUInt16LE(0, 6);
  let off = 8;
  for (let d = 0; d < rank; d++) {
    head.writeBigUInt64LE(BigInt(shape[d]), off);
    off += 8;
    head.write(axes[d].name.padEnd(16, "\0"), off, "latin1");
    off += 16;
    head.writeDoubleLE(axes[d].min, off);
    head.writeDoubleLE(axes[d].step, off + 8);
    off += 16;
  }
  const payload = Buffer.alloc(values.length * 8);
  values.forEach((v, i) => payload.writeDoubleLE(v, i * 8));
  writeFileSync(path, Buffer.concat([head, payload]));
}

function csv(path: string, cols: Record<string, Array<number | string>>) {
  const names = Object.keys(cols);
  const n = cols[names[0]].length;
  const lines = [names.join(",")];
  for (let i = 0; i < n; i++) {
    lines.push(names.map((k) => `${cols[k][i]}`).join(","));
  }
  writeFileSync(path, lines.join("\n") + "\n");
}

export interface Fixture {
  dir: string;
  manifestPath: string;
}

export function buildFixture(): Fixture {
  const dir = mkdtempSync(join(tmpdir(), "attoplot-"));
  const nz = 41;
  const np_ = 33;
  const zAxis = { name: "z", min: -20.0, step: 1.0 };
  const pAxis = { name: "p", min: -1.6, step: 0.1 };
  const zs = Array.from({ length: nz }, (_, i) => zAxis.min + i);
  const instants = [155, 160, 165];
  const files: Record<string, Record<string, string>> = {};
  const add = (stage: string, rel: string) => {
    (files[stage] ??= {})[rel] = "0".repeat(64);
  };

  for (const t of instants) {
    const w: number[] = [];
    for (let i = 0; i < nz; i++) {
      for (let m = 0; m < np_; m++) {
        const z = zAxis.min + i;
        const p = pAxis.min + 0.1 * m;
        w.push(Math.exp(-z * z / 40 - p * p) *
               (1 + 0.3 * Math.sin(3 * z * p)));
      }
    }
    writeAsf(join(dir, `wigner_t${t}.asf`), [nz, np_], [zAxis, pAxis], w);
    add("phase-space", `wigner_t${t}.asf`);
  }
  const qTimes = [155, 157, 160, 165, 185, 210, 230];
  for (const t of qTimes) {
    csv(join(dir, `phase_t${t}.csv`), {
      z: zs,
      density: zs.map((z) => Math.exp(-z * z / 40)),
      j: zs.map((z) => 0.1 * Math.exp(-z * z / 50)),
      q: zs.map((z) => 0.2 + 0.01 * z),
      mask: zs.map(() => 1.0),
    });
    add("phase-space", `phase_t${t}.csv`);
  }

  const energies = Array.from({ length: 60 }, (_, k) => -0.6 + 0.012 * k);
  for (const t of instants) {
    csv(join(dir, `energy_dist_t${t}.csv`), {
      E: energies,
      density: energies.map((e) =>
        Math.exp(-((e + 0.49) ** 2) / 0.002) + 0.05),
      population: energies.map(() => 0.01),
    });
    add("spectral1d", `energy_dist_t${t}.csv`);
    csv(join(dir, `currents_t${t}.csv`), {
      z: zs,
      j: zs.map((z) => 1e-3 * Math.exp(-((z - 5) ** 2) / 20)),
      j_ft: zs.map((z) => 8e-4 * Math.exp(-((z - 5) ** 2) / 18)),
      j_ob: zs.map((z) => 6e-4 * Math.exp(-((z - 6) ** 2) / 22)),
      j_st: zs.map(() => 1e-6),
      dens: zs.map((z) => Math.exp(-z * z / 30) + 1e-4),
      dens_ft: zs.map((z) => Math.exp(-z * z / 30) + 1e-4),
      dens_ob: zs.map((z) => 0.1 * Math.exp(-z * z / 40) + 1e-4),
      dens_st: zs.map(() => 1e-5),
    });
    add("spectral1d", `currents_t${t}.csv`);
  }
  csv(join(dir, "spectral_summary.csv"), {
    t: instants,
    mean: [-0.484, -0.487, -0.489],
    spread: [0.24, 0.27, 0.28],
    v_top: [-0.436, -0.465, -0.474],
    v_top_ref: [-0.447, -0.479, -0.49],
    norm: [1.0, 1.0, 0.9999],
  });
  add("spectral1d", "spectral_summary.csv");

  const tsList = [149, 153, 157];
  for (const ts of tsList) {
    const t = Array.from({ length: 30 }, (_, k) => ts + 6 * k);
    csv(join(dir, `traj_ts${ts}.csv`), {
      t,
      z: t.map((x) => 6 + 0.4 * (x - ts)),
      p: t.map((x) => 0.2 + 0.002 * (x - ts)),
    });
    add("trajectories", `traj_ts${ts}.csv`);
  }
  csv(join(dir, "ensemble_summary.csv"), {
    t_s: tsList,
    z_i: [6.8, 6.2, 5.7],
    E_s: [-0.37, -0.42, -0.46],
    p0: [0.18, 0.22, 0.22],
    outcome: ["direct-escape", "direct-escape", "direct-escape"],
    p_f: [0.75, 0.61, 0.36],
    z_f: [157, 132, 90],
    energy_f: [0.27, 0.18, 0.05],
  });
  add("trajectories", "ensemble_summary.csv");

  for (const t of [158, 180]) {
    const w: number[] = [];
    for (let i = 0; i < nz; i++) {
      for (let m = 0; m < np_; m++) {
        const p = pAxis.min + 0.1 * m;
        w.push(Math.exp(-((zAxis.min + i - 8) ** 2) / 60
                        - ((p - 0.3) ** 2) * 4));
      }
    }
    writeAsf(join(dir, `pmpe_wigner_t${t}.asf`), [nz, np_], [zAxis, pAxis], w);
    add("pmpe", `pmpe_wigner_t${t}.asf`);
    csv(join(dir, `pmpe_q_t${t}.csv`), {
      z: zs, q: zs.map((z) => 0.3 + 0.005 * z), mask: zs.map(() => 1.0),
    });
    add("pmpe", `pmpe_q_t${t}.csv`);
    const ps = Array.from({ length: np_ }, (_, m) => pAxis.min + 0.1 * m);
    csv(join(dir, `pmpe_momentum_t${t}.csv`), {
      p: ps, density: ps.map((p) => Math.exp(-((p - 0.3) ** 2) * 6)),
    });
    add("pmpe", `pmpe_momentum_t${t}.csv`);
    csv(join(dir, `pmpe_dots_t${t}.csv`), {
      t_s: [149, 153, 157],
      z: [24, 16, 9],
      p: [0.5, 0.4, 0.3],
      w_value: [0.2, 0.5, 0.8],
      w_max: [1, 1, 1],
    });
    add("pmpe", `pmpe_dots_t${t}.csv`);
  }

  csv(join(dir, "table1.csv"), {
    t_s: [149, 151, 153],
    p_d: [0.7411, 0.6585, 0.597],
    t_s_r: [151.47, 153.34, 154.46],
    status: ["ok", "ok", "ok"],
  });
  add("reconstruct", "table1.csv");

  const manifest = {
    schema: "attoscope-manifest@1",
    pulse: { F: 0.06, T: 110.0, N: 3, phi: 0.0 },
    grid: { z_min: -20, z_max: 20, dz: 1.0, rho_max: 10, drho: 1.0 },
    stages: {
      "phase-space": { files: files["phase-space"],
                       wigner_times: instants.map(Number),
                       q_times: qTimes.map(Number) },
      spectral1d: { files: files["spectral1d"], times: instants,
                    softening: 1.4147 },
      trajectories: { files: files["trajectories"], ts: tsList },
      pmpe: { files: files["pmpe"], times: [158, 180], norm: 0.0033 },
      reconstruct: { files: files["reconstruct"] },
    },
  };
  const manifestPath = join(dir, "manifest.json");
  writeFileSync(manifestPath, JSON.stringify(manifest, null, 1));
  return { dir, manifestPath };
}
