"""Stage orchestration: runs the pipeline stages, writes their artifacts
atomically, and maintains a manifest with a content digest per file.

Stage graph:

    ground -> propagate -> phase-space -> trajectories -> reconstruct
                        \\-> pmpe (also needs phase-space)
    spectral1d            (independent)

Artifacts are CSV for 1D curves and tables, ASF1 binary arrays for 2D fields
(see arrayio). Every write goes through a temp file + rename; the manifest is
rewritten after each stage with sha256 digests, so identical configurations
reproduce identical manifests bit for bit.
"""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from . import classical as cl
from . import pmpe as pm
from . import reconstruct as rc
from . import spectral1d as sp
from .arrayio import Axis, read_array, read_csv, write_array, write_csv
from .errors import MissingPrerequisiteError
from .model import GridSpec2D, keldysh_gamma
from .phase_space import (QSnapshotSet, QuantumMomentumCurve, current,
                          flow_momentum_from_density, moments, reduce, wigner,
                          conjugate_momentum_grid, momentum_distribution)
from .runconfig import STAGES, RunConfig
from .tdse import (BoundStateSet, Wavefunction2D, bound_states, ground_state,
                   propagate)


def _fmt_t(t: float) -> str:
    return f"{t:g}"


def _atomic_bytes(path: Path, blob: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def save_wavefunction(path, wf: Wavefunction2D) -> None:
    """Checkpoint a state; time rides along as a degenerate leading axis."""
    g = wf.grid
    axes = [Axis("t", wf.t, 0.0), Axis("z", g.z_min, g.dz),
            Axis("rho", g.drho / 2, g.drho)]
    write_array(path, wf.values[None, :, :], axes)


def load_wavefunction(path) -> Wavefunction2D:
    data, axes = read_array(path)
    if len(axes) != 3 or [a.name for a in axes] != ["t", "z", "rho"]:
        raise ValueError(f"{path}: not a wavefunction checkpoint")
    t_ax, z_ax, r_ax = axes
    nz, nr = data.shape[1], data.shape[2]
    grid = GridSpec2D(z_min=z_ax.minimum,
                      z_max=z_ax.minimum + z_ax.step * (nz - 1),
                      dz=z_ax.step, rho_max=r_ax.step * nr, drho=r_ax.step)
    return Wavefunction2D(grid, np.ascontiguousarray(data[0]), t=t_ax.minimum)


class Pipeline:
    def __init__(self, cfg: RunConfig, out_dir=None):
        self.cfg = cfg
        self.out = Path(out_dir if out_dir is not None else cfg.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self._write_config_copy()

    # ---- manifest ------------------------------------------------------
    @property
    def manifest_path(self) -> Path:
        return self.out / "manifest.json"

    def _load_manifest(self) -> dict:
        if self.manifest_path.exists():
            with open(self.manifest_path, "r", encoding="utf-8") as fh:
                return json.load(fh)
        return {"schema": "attoscope-manifest@1",
                "pulse": {"F": self.cfg.pulse.F, "T": self.cfg.pulse.T,
                          "N": self.cfg.pulse.N, "phi": self.cfg.pulse.phi},
                "grid": {"z_min": self.cfg.grid.z_min,
                         "z_max": self.cfg.grid.z_max, "dz": self.cfg.grid.dz,
                         "rho_max": self.cfg.grid.rho_max,
                         "drho": self.cfg.grid.drho},
                "stages": {}}

    def _record_stage(self, name: str, files: list, meta: dict) -> None:
        man = self._load_manifest()
        entry = {"files": {str(p.relative_to(self.out)): _digest(p)
                           for p in sorted(files)}}
        entry.update(meta)
        man["stages"][name] = entry
        blob = json.dumps(man, sort_keys=True, indent=1).encode("utf-8")
        _atomic_bytes(self.manifest_path, blob)

    def _write_config_copy(self) -> None:
        _atomic_bytes(self.out / "config.ini",
                      self.cfg.serialize().encode("utf-8"))

    def _require(self, stage: str, *paths) -> None:
        missing = [str(p) for p in paths if not Path(p).exists()]
        if missing:
            raise MissingPrerequisiteError(
                f"stage '{stage}' needs missing inputs: {', '.join(missing)}")

    # ---- stages ---------------------------------------------------------
    def run_stage(self, name: str, ts_list=None, snapshot_times=None,
                  pd_file=None) -> list:
        if name not in STAGES:
            raise ValueError(f"unknown stage {name!r}; choose from {STAGES}")
        if name == "all":
            produced = []
            for stage in ("ground", "propagate", "phase-space", "spectral1d",
                          "trajectories", "pmpe", "reconstruct"):
                produced += self.run_stage(stage, ts_list=ts_list,
                                           snapshot_times=snapshot_times,
                                           pd_file=pd_file)
            return produced
        method = getattr(self, "_stage_" + name.replace("-", "_"))
        kwargs = {}
        if name == "trajectories" and ts_list:
            kwargs["ts_list"] = ts_list
        if name == "propagate" and snapshot_times:
            kwargs["snapshot_times"] = snapshot_times
        if name == "reconstruct":
            kwargs["pd_file"] = pd_file
            if ts_list:
                kwargs["ts_list"] = ts_list
        return method(**kwargs)

    def _stage_ground(self) -> list:
        wf, energy = ground_state(self.cfg.grid, self.cfg.propagator)
        path = self.out / "ground.asf"
        save_wavefunction(path, wf)
        report = self.out / "ground_report.txt"
        gamma = keldysh_gamma(self.cfg.pulse)
        _atomic_bytes(report, (
            f"ground-state energy (a.u.): {energy!r}\n"
            f"norm: {wf.norm2()!r}\n"
            f"keldysh gamma: {gamma!r}\n").encode("utf-8"))
        self._record_stage("ground", [path, report],
                           {"energy": energy, "keldysh_gamma": gamma})
        return [path, report]

    def _stage_propagate(self, snapshot_times=None) -> list:
        self._require("propagate", self.out / "ground.asf")
        wf0 = load_wavefunction(self.out / "ground.asf")
        times = sorted(set(snapshot_times or
                           (self.cfg.analysis.q_times
                            + self.cfg.analysis.wigner_times)))
        snap_dir = self.out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        produced = []

        def sink(w):
            p = snap_dir / f"psi_t{_fmt_t(round(w.t, 6))}.asf"
            save_wavefunction(p, w)
            produced.append(p)

        final = propagate(wf0, self.cfg.pulse, self.cfg.propagator,
                          0.0, self.cfg.pulse.duration,
                          snapshot_times=times, sink=sink)
        fpath = self.out / "final.asf"
        save_wavefunction(fpath, final)
        produced.append(fpath)
        self._record_stage("propagate", produced,
                           {"final_norm": final.norm2(),
                            "snapshot_times": times})
        return produced

    def _snapshot_path(self, t: float) -> Path:
        return self.out / "snapshots" / f"psi_t{_fmt_t(round(t, 6))}.asf"

    def _stage_phase_space(self) -> list:
        a = self.cfg.analysis
        needed = sorted(set(a.q_times + a.wigner_times))
        self._require("phase-space", *[self._snapshot_path(t) for t in needed])
        produced = []
        wig_times = {round(float(x), 9) for x in a.wigner_times}
        for t in needed:
            wf = load_wavefunction(self._snapshot_path(t))
            rho = reduce(wf)
            qc = flow_momentum_from_density(rho, floor=a.density_floor)
            j = current(rho)
            path = self.out / f"phase_t{_fmt_t(t)}.csv"
            write_csv(path, {"z": rho.z, "density": rho.diagonal, "j": j,
                             "q": qc.q, "mask": qc.mask.astype(float)})
            produced.append(path)
            if round(float(t), 9) in wig_times:
                pg = np.linspace(a.p_min, a.p_max, a.p_n)
                w = wigner(rho, pg)
                wpath = self.out / f"wigner_t{_fmt_t(t)}.asf"
                write_array(wpath, w.values,
                            [Axis("z", rho.z[0], rho.dz),
                             Axis("p", pg[0], pg[1] - pg[0])])
                produced.append(wpath)
        self._record_stage("phase-space", produced,
                           {"q_times": sorted(a.q_times),
                            "wigner_times": sorted(a.wigner_times),
                            "density_floor": a.density_floor})
        return produced

    def _q_snapshots(self) -> QSnapshotSet:
        a = self.cfg.analysis
        times, curves = [], []
        for t in sorted(a.q_times):
            path = self.out / f"phase_t{_fmt_t(t)}.csv"
            self._require("phase-space outputs", path)
            cols = read_csv(path)
            curves.append(QuantumMomentumCurve(
                z=cols["z"], q=cols["q"], mask=cols["mask"] > 0.5,
                floor=a.density_floor, t=t))
            times.append(t)
        return QSnapshotSet(times=np.array(times), curves=curves)

    def _stage_spectral1d(self) -> list:
        a = self.cfg.analysis
        s = self.cfg.spectral1d
        model = sp.make_model(self.cfg.pulse, z_max=s.z_max, dz=s.dz)
        times = sorted(a.spectral_times)
        _, snaps = sp.run_1d_companion(model, dt=s.dt, snapshot_times=times)
        produced = []
        summary = {"t": [], "mean": [], "spread": [], "v_top": [],
                   "v_top_ref": [], "norm": []}
        for t in times:
            spec = sp.instantaneous_spectrum(model, t)
            psi = snaps[t]
            dist = sp.energy_distribution(spec, psi, model.dz)
            path = self.out / f"energy_dist_t{_fmt_t(t)}.csv"
            write_csv(path, {"E": dist.energies, "density": dist.density,
                             "population": dist.populations})
            produced.append(path)
            ft, ob, st = sp.decompose_packets(spec, psi, model.dz,
                                              st_width=a.st_width)
            j_ft, j_ob, j_st, j = sp.packet_currents(ft, ob, st, psi, model.dz)
            cpath = self.out / f"currents_t{_fmt_t(t)}.csv"
            write_csv(cpath, {"z": model.z, "j": j, "j_ft": j_ft,
                              "j_ob": j_ob, "j_st": j_st,
                              "dens": np.abs(psi) ** 2,
                              "dens_ft": np.abs(ft) ** 2,
                              "dens_ob": np.abs(ob) ** 2,
                              "dens_st": np.abs(st) ** 2})
            produced.append(cpath)
            summary["t"].append(t)
            summary["mean"].append(dist.mean)
            summary["spread"].append(dist.spread)
            summary["v_top"].append(dist.v_top)
            summary["v_top_ref"].append(spec.v_top_reference)
            summary["norm"].append(sp.norm2_1d(model, psi))
        spath = self.out / "spectral_summary.csv"
        write_csv(spath, summary)
        produced.append(spath)
        self._record_stage("spectral1d", produced,
                           {"softening": model.a, "times": times,
                            "st_width": a.st_width})
        return produced

    def _stage_trajectories(self, ts_list=None) -> list:
        a = self.cfg.analysis
        qset = self._q_snapshots()
        ts_all = sorted(set((ts_list or a.ts_list) + a.outcome_ts))
        produced = []
        rows = {"t_s": [], "z_i": [], "E_s": [], "p0": [], "outcome": [],
                "p_f": [], "z_f": [], "energy_f": []}
        devs = {"t_s": [], "t_compare": [], "deviation": []}
        for t_s in ts_all:
            try:
                ic = cl.solve_initial_condition(t_s, qset.at(t_s),
                                                self.cfg.pulse)
            except Exception as err:
                rows["t_s"].append(t_s)
                rows["z_i"].append(np.nan)
                rows["E_s"].append(np.nan)
                rows["p0"].append(np.nan)
                rows["outcome"].append(f"no-seed:{type(err).__name__}")
                rows["p_f"].append(np.nan)
                rows["z_f"].append(np.nan)
                rows["energy_f"].append(np.nan)
                continue
            traj = cl.propagate_trajectory(ic, self.cfg.pulse)
            path = self.out / f"traj_ts{_fmt_t(t_s)}.csv"
            write_csv(path, {"t": traj.t, "z": traj.z, "p": traj.p})
            produced.append(path)
            rows["t_s"].append(t_s)
            rows["z_i"].append(ic.z_i)
            rows["E_s"].append(ic.E_s)
            rows["p0"].append(ic.p0)
            rows["outcome"].append(traj.outcome)
            rows["p_f"].append(traj.p_f)
            rows["z_f"].append(traj.z_f)
            rows["energy_f"].append(traj.energy_f)
            for t_c in a.compare_times:
                if t_c < t_s or t_c > qset.times[-1]:
                    continue
                k = int(np.argmin(np.abs(traj.t - t_c)))
                qv = cl._interp_q(qset.at(t_c), traj.z[k])
                if qv is not None:
                    devs["t_s"].append(t_s)
                    devs["t_compare"].append(t_c)
                    devs["deviation"].append(abs(traj.p[k] - qv))
        spath = self.out / "ensemble_summary.csv"
        write_csv(spath, rows)
        dpath = self.out / "ensemble_deviation.csv"
        write_csv(dpath, devs)
        produced += [spath, dpath]
        self._record_stage("trajectories", produced, {"ts": ts_all})
        return produced

    def _stage_pmpe(self) -> list:
        a = self.cfg.analysis
        self._require("pmpe", self.out / "final.asf")
        final = load_wavefunction(self.out / "final.asf")
        bounds = bound_states(final.grid, self.cfg.propagator, n_max=a.n_max)
        pkt = pm.build_pmpe(final, bounds)
        snaps = pm.backpropagate_pmpe(pkt, self.cfg.pulse,
                                      self.cfg.propagator,
                                      snapshot_times=sorted(a.pmpe_times))
        produced = []
        qset = None
        try:
            qset = self._q_snapshots()
        except MissingPrerequisiteError:
            pass
        for t, wf in sorted(snaps.items()):
            w, qc = pm.pmpe_wigner(wf, floor=a.density_floor)
            wpath = self.out / f"pmpe_wigner_t{_fmt_t(t)}.asf"
            write_array(wpath, w.values,
                        [Axis("z", w.z[0], w.dz), Axis("p", w.p[0], w.dp)])
            produced.append(wpath)
            qpath = self.out / f"pmpe_q_t{_fmt_t(t)}.csv"
            write_csv(qpath, {"z": qc.z, "q": qc.q,
                              "mask": qc.mask.astype(float)})
            produced.append(qpath)
            mpath = self.out / f"pmpe_momentum_t{_fmt_t(t)}.csv"
            write_csv(mpath, {"p": w.p, "density": momentum_distribution(w)})
            produced.append(mpath)
            if qset is not None:
                dots = {"t_s": [], "z": [], "p": [], "w_value": [],
                        "w_max": []}
                for t_s in [149.0, 153.0, 157.0, 158.0]:
                    if t_s > t or t_s < qset.times[0]:
                        continue
                    try:
                        ic = cl.solve_initial_condition(t_s, qset.at(t_s),
                                                        self.cfg.pulse)
                        traj = cl.propagate_trajectory(ic, self.cfg.pulse,
                                                       until=max(t, t_s + 1.0))
                    except Exception:
                        continue
                    k = int(np.argmin(np.abs(traj.t - t)))
                    dots["t_s"].append(t_s)
                    dots["z"].append(traj.z[k])
                    dots["p"].append(traj.p[k])
                    dots["w_value"].append(
                        pm.wigner_value_at(w, traj.z[k], traj.p[k]))
                    dots["w_max"].append(float(w.values.max()))
                dpath = self.out / f"pmpe_dots_t{_fmt_t(t)}.csv"
                write_csv(dpath, dots)
                produced.append(dpath)
        rpath = self.out / "pmpe_report.txt"
        lines = [f"norm {k}: {v!r}" for k, v in pkt.stage_norms.items()]
        lines.append(f"iterations: {pkt.iterations}")
        lines.append("subtracted: " + ", ".join(f"n={n} l={l}"
                                                for n, l in pkt.subtracted))
        lines.append("bound energies: " + ", ".join(repr(float(e))
                                                    for e in bounds.energies))
        _atomic_bytes(rpath, ("\n".join(lines) + "\n").encode("utf-8"))
        produced.append(rpath)
        self._record_stage("pmpe", produced,
                           {"times": sorted(a.pmpe_times), "norm": pkt.norm,
                            "n_max": a.n_max})
        return produced

    def _stage_reconstruct(self, ts_list=None, pd_file=None) -> list:
        a = self.cfg.analysis
        qset = self._q_snapshots()
        produced = []
        records = []
        if pd_file is not None:
            cols = read_csv(pd_file)
            for p_d in cols["p_d"]:
                records.append((None, rc.DetectionRecord(p_d=float(p_d))))
        else:
            spath = self.out / "ensemble_summary.csv"
            self._require("reconstruct", spath)
            cols = read_csv(spath)
            wanted = ts_list or a.ts_list
            for i, t_s in enumerate(cols["t_s"]):
                if not any(abs(t_s - w) < 1e-9 for w in wanted):
                    continue
                if cols["outcome"][i] != "direct-escape":
                    records.append((float(t_s), cols["outcome"][i]))
                    continue
                v_f = -1.0 / abs(cols["z_f"][i])
                arg = cols["p_f"][i] ** 2 + 2 * v_f
                if arg < 0:
                    records.append((float(t_s), "bound-electron"))
                    continue
                records.append((float(t_s), rc.DetectionRecord(
                    p_d=float(np.sqrt(arg)), t_s_true=float(t_s),
                    p_f=float(cols["p_f"][i]), z_f=float(cols["z_f"][i]))))
        table = {"t_s": [], "p_d": [], "t_s_r": [], "status": []}
        report_lines = []
        for t_s, rec in records:
            if isinstance(rec, str):
                table["t_s"].append(np.nan if t_s is None else t_s)
                table["p_d"].append(np.nan)
                table["t_s_r"].append(np.nan)
                table["status"].append(f"skipped:{rec}")
                report_lines.append(f"t_s={t_s}: skipped ({rec})")
                continue
            try:
                res = rc.reconstruct_ts(rec, self.cfg.pulse, qset)
            except Exception as err:
                table["t_s"].append(np.nan if t_s is None else t_s)
                table["p_d"].append(rec.p_d)
                table["t_s_r"].append(np.nan)
                table["status"].append(f"failed:{type(err).__name__}")
                report_lines.append(f"p_d={rec.p_d:.4f}: {err}")
                continue
            table["t_s"].append(np.nan if t_s is None else t_s)
            table["p_d"].append(rec.p_d)
            table["t_s_r"].append(res.t_s_r)
            table["status"].append("ok")
            tag = "" if t_s is None else f" (true t_s {t_s:g}, " \
                                         f"error {res.t_s_r - t_s:+.2f})"
            report_lines.append(
                f"p_d={rec.p_d:.4f}: reconstructed starting time "
                f"{res.t_s_r:.2f}{tag}; z_0={res.z_0:.2f}, p_0={res.p_0:.3f}, "
                f"{res.iterations} iterations")
        tpath = self.out / "table1.csv"
        write_csv(tpath, table)
        rpath = self.out / "reconstruct_report.txt"
        _atomic_bytes(rpath, ("\n".join(report_lines) + "\n").encode("utf-8"))
        produced += [tpath, rpath]
        self._record_stage("reconstruct", produced, {})
        return produced
