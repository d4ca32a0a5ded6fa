"""Run configuration: flat key=value text with [sections], validated as a
whole (every violation reported, not just the first)."""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import GridSpec2D, PulseParams
from .tdse import PropagatorConfig

STAGES = ("ground", "propagate", "phase-space", "spectral1d", "trajectories",
          "pmpe", "reconstruct", "all")


def _frange(start: float, stop: float, step: float) -> list:
    out = []
    t = start
    while t <= stop + 1e-9:
        out.append(round(t, 9))
        t += step
    return out


@dataclass
class AnalysisConfig:
    q_times: list = field(default_factory=lambda: _frange(140, 200, 1)
                          + _frange(205, 235, 5))
    wigner_times: list = field(default_factory=lambda: [155.0, 160.0, 165.0])
    spectral_times: list = field(default_factory=lambda: _frange(150, 165, 1))
    pmpe_times: list = field(default_factory=lambda: [158.0, 180.0])
    ts_list: list = field(default_factory=lambda: [149.0, 151.0, 153.0, 154.0,
                                                   155.0, 156.0, 157.0])
    outcome_ts: list = field(default_factory=lambda: [149.0, 153.0, 157.0,
                                                      159.0, 165.0])
    compare_times: list = field(default_factory=lambda: [185.0, 210.0, 230.0])
    p_n: int = 512
    p_min: float = -2.0
    p_max: float = 2.0
    n_max: int = 4
    st_width: float = 0.004
    density_floor: float = 1e-8


@dataclass
class Spectral1DConfig:
    z_max: float = 400.0
    dz: float = 0.2
    dt: float = 0.04


@dataclass
class RunConfig:
    pulse: PulseParams = field(default_factory=PulseParams)
    grid: GridSpec2D = field(default_factory=lambda: GridSpec2D(
        z_min=-120.0, z_max=120.0, dz=0.3, rho_max=60.0, drho=0.3))
    propagator: PropagatorConfig = field(default_factory=lambda:
                                         PropagatorConfig(dt=0.03125))
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    spectral1d: Spectral1DConfig = field(default_factory=Spectral1DConfig)
    output_dir: str = "out"

    def serialize(self) -> str:
        cp = configparser.ConfigParser()
        cp["pulse"] = {"F": repr(self.pulse.F), "T": repr(self.pulse.T),
                       "N": str(self.pulse.N), "phi": repr(self.pulse.phi)}
        cp["grid"] = {k: repr(getattr(self.grid, k))
                      for k in ("z_min", "z_max", "dz", "rho_max", "drho")}
        cp["propagator"] = {
            "dt": repr(self.propagator.dt),
            "absorber_on": str(self.propagator.absorber_on),
            "absorber_frac": repr(self.propagator.absorber_frac),
            "absorber_strength": repr(self.propagator.absorber_strength),
        }
        a = self.analysis
        cp["analysis"] = {
            "q_times": _fmt_list(a.q_times),
            "wigner_times": _fmt_list(a.wigner_times),
            "spectral_times": _fmt_list(a.spectral_times),
            "pmpe_times": _fmt_list(a.pmpe_times),
            "ts_list": _fmt_list(a.ts_list),
            "outcome_ts": _fmt_list(a.outcome_ts),
            "compare_times": _fmt_list(a.compare_times),
            "p_n": str(a.p_n), "p_min": repr(a.p_min), "p_max": repr(a.p_max),
            "n_max": str(a.n_max), "st_width": repr(a.st_width),
            "density_floor": repr(a.density_floor),
        }
        s = self.spectral1d
        cp["spectral1d"] = {"z_max": repr(s.z_max), "dz": repr(s.dz),
                            "dt": repr(s.dt)}
        cp["output"] = {"directory": self.output_dir}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _fmt_list(xs) -> str:
    return ",".join(repr(float(x)) for x in xs)


def _parse_list(s: str) -> list:
    s = s.strip()
    if not s:
        return []
    return [float(x) for x in s.split(",")]


def default_config() -> RunConfig:
    return RunConfig()


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text; raises ConfigError carrying
    every violation found."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError([f"parse error: {err}"])
    problems: list[str] = []
    cfg = RunConfig()

    def take(section, key, cast, current):
        if not cp.has_option(section, key):
            return current
        raw = cp.get(section, key)
        try:
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError:
            problems.append(f"[{section}] {key}: cannot parse {raw!r}")
            return current

    fields = {}
    fields["F"] = take("pulse", "F", float, cfg.pulse.F)
    fields["T"] = take("pulse", "T", float, cfg.pulse.T)
    fields["N"] = take("pulse", "N", int, cfg.pulse.N)
    fields["phi"] = take("pulse", "phi", float, cfg.pulse.phi)
    if fields["F"] <= 0:
        problems.append("[pulse] F: field amplitude must be positive")
    if fields["T"] <= 0:
        problems.append("[pulse] T: optical period must be positive")
    if fields["N"] < 1:
        problems.append("[pulse] N: cycle count must be >= 1")

    gr = {k: take("grid", k, float, getattr(cfg.grid, k))
          for k in ("z_min", "z_max", "dz", "rho_max", "drho")}
    if not gr["z_min"] < 0 < gr["z_max"]:
        problems.append("[grid] z_min/z_max: grid must straddle z = 0")
    if gr["dz"] <= 0:
        problems.append("[grid] dz: spacing must be positive")
    if gr["drho"] <= 0:
        problems.append("[grid] drho: spacing must be positive")
    if gr["rho_max"] <= 0:
        problems.append("[grid] rho_max: extent must be positive")

    dt = take("propagator", "dt", float, cfg.propagator.dt)
    if dt <= 0:
        problems.append("[propagator] dt: time step must be positive")
    absorber_on = take("propagator", "absorber_on", bool,
                       cfg.propagator.absorber_on)
    absorber_frac = take("propagator", "absorber_frac", float,
                         cfg.propagator.absorber_frac)
    absorber_strength = take("propagator", "absorber_strength", float,
                             cfg.propagator.absorber_strength)
    if not (0 <= absorber_frac < 0.5):
        problems.append("[propagator] absorber_frac: must lie in [0, 0.5)")
    if absorber_strength < 0:
        problems.append("[propagator] absorber_strength: must be >= 0")

    a = cfg.analysis
    for key in ("q_times", "wigner_times", "spectral_times", "pmpe_times",
                "ts_list", "outcome_ts", "compare_times"):
        if cp.has_option("analysis", key):
            try:
                setattr(a, key, _parse_list(cp.get("analysis", key)))
            except ValueError:
                problems.append(f"[analysis] {key}: cannot parse list")
    a.p_n = take("analysis", "p_n", int, a.p_n)
    a.p_min = take("analysis", "p_min", float, a.p_min)
    a.p_max = take("analysis", "p_max", float, a.p_max)
    a.n_max = take("analysis", "n_max", int, a.n_max)
    a.st_width = take("analysis", "st_width", float, a.st_width)
    a.density_floor = take("analysis", "density_floor", float, a.density_floor)
    if a.p_n < 2:
        problems.append("[analysis] p_n: need at least 2 momentum nodes")
    if a.n_max < 1:
        problems.append("[analysis] n_max: must be >= 1")
    if gr["dz"] > 0:
        p_lim = np.pi / (2 * gr["dz"])
        if max(abs(a.p_min), abs(a.p_max)) > p_lim + 1e-12:
            problems.append(
                f"[analysis] p_min/p_max: momentum window exceeds the "
                f"|p| <= pi/(2 dz) = {p_lim:.4f} limit of dz = {gr['dz']}")

    s = cfg.spectral1d
    s.z_max = take("spectral1d", "z_max", float, s.z_max)
    s.dz = take("spectral1d", "dz", float, s.dz)
    s.dt = take("spectral1d", "dt", float, s.dt)
    if s.dz <= 0 or s.dt <= 0 or s.z_max <= 0:
        problems.append("[spectral1d] z_max/dz/dt: must be positive")

    out_dir = cp.get("output", "directory", fallback=cfg.output_dir)

    if problems:
        raise ConfigError(problems)
    cfg.pulse = PulseParams(F=fields["F"], T=fields["T"], N=fields["N"],
                            phi=fields["phi"])
    cfg.grid = GridSpec2D(**gr)
    cfg.propagator = PropagatorConfig(dt=dt, absorber_on=absorber_on,
                                      absorber_frac=absorber_frac,
                                      absorber_strength=absorber_strength)
    cfg.output_dir = out_dir
    return cfg


def validate_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
