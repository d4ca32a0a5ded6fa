"""Instantaneous phase-space curves, initial-condition matching at the
outermost inflection point, classical escape trajectories and outcome
classification.

The on-axis potential is the bare V(z, 0, t) = -1/|z| + E_z(t) z. Stationary
curves are p(z; t, E) = sqrt(2 (E - V(z, 0, t))) on the classically allowed
set. An escape trajectory is seeded at the unique energy E_s where the
quantum flow momentum matches the stationary curve at its outermost
inflection point.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoBracketError, NoInflectionError
from .model import PulseParams, barrier_geometry, downfield_sign, field_at
from .phase_space import QuantumMomentumCurve

CORE_RADIUS = 2.0           # |z| ball defining a rescattering visit
REG_EPS = 0.1               # Coulomb regularization length inside |z| < 1
REG_ZONE = 1.0


@dataclass
class StationaryCurve:
    t: float
    E: float
    z: np.ndarray
    p: np.ndarray               # sqrt(2(E - V)) where allowed, NaN elsewhere
    allowed: np.ndarray


@dataclass
class InitialCondition:
    t_s: float
    z_i: float
    E_s: float
    p0: float
    residual: float             # |q(z_i) - p(z_i; E_s)| at acceptance


@dataclass
class Trajectory:
    initial: InitialCondition
    t: np.ndarray
    z: np.ndarray
    p: np.ndarray
    outcome: str                # direct-escape | recapture | rescatter
    p_f: float
    z_f: float
    energy_f: float
    reentered: bool


def on_axis_potential(z, t, pulse: PulseParams):
    z = np.asarray(z, dtype=float)
    return -1.0 / np.abs(z) + field_at(pulse, t) * z


def stationary_momentum(z, t, E, pulse: PulseParams):
    """p(z; t, E) on the allowed set, NaN where E < V."""
    v = on_axis_potential(z, t, pulse)
    arg = 2.0 * (E - v)
    with np.errstate(invalid="ignore"):
        return np.where(arg >= 0.0, np.sqrt(np.maximum(arg, 0.0)), np.nan)


def stationary_curve(t: float, E: float, z_range, pulse: PulseParams,
                     n_samples: int = 2001) -> StationaryCurve:
    z = np.linspace(z_range[0], z_range[1], n_samples)
    z = z[np.abs(z) > 1e-9]
    p = stationary_momentum(z, t, E, pulse)
    return StationaryCurve(t=t, E=E, z=z, p=p, allowed=np.isfinite(p))


def _d2p_stencil(z, t: float, E: float, pulse: PulseParams, h: float):
    """5-point second derivative of the stationary curve at z (scalar or
    array); NaN where the stencil touches the forbidden region. The stencil
    width is fixed by the caller so bisection targets one continuous
    function."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    pts = z[:, None] + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])[None, :]
    v = on_axis_potential(pts, t, pulse)
    arg = 2.0 * (E - v)
    with np.errstate(invalid="ignore"):
        p = np.where(arg >= 0.0, np.sqrt(np.maximum(arg, 0.0)), np.nan)
    d2 = (-p[:, 0] + 16 * p[:, 1] - 30 * p[:, 2] + 16 * p[:, 3] - p[:, 4]) \
        / (12 * h * h)
    return d2 if d2.size > 1 else float(d2[0])


def outermost_inflection(t: float, E: float, z_range, pulse: PulseParams,
                         n_scan: int = 800, z_tol: float = 1e-10) -> float:
    """Largest |z| in range where d2 p/dz2 changes sign; sign scan on an
    oversampled curve, then bisection of the 5-point-stencil derivative."""
    z_lo, z_hi = sorted(z_range, key=abs)
    s = float(np.sign(z_hi)) or 1.0
    zeta = np.linspace(abs(z_lo), abs(z_hi), n_scan)
    h = max((abs(z_hi) - abs(z_lo)) / n_scan, 1e-4)
    g = _d2p_stencil(s * zeta, t, E, pulse, h)
    ok = np.isfinite(g)
    sign_change = ok[:-1] & ok[1:] & (g[:-1] * g[1:] < 0.0)
    hits = np.flatnonzero(sign_change)
    if hits.size == 0:
        raise NoInflectionError(
            f"no inflection of p(z; E={E:+.4f}) in |z| range "
            f"[{abs(z_lo):.2f}, {abs(z_hi):.2f}] at t = {t}")
    k = hits[-1]
    a, b = zeta[k], zeta[k + 1]
    ga = g[k]
    for _ in range(200):
        mid = 0.5 * (a + b)
        gm = _d2p_stencil(s * mid, t, E, pulse, h)
        if gm is None:
            break
        if ga * gm <= 0.0:
            b = mid
        else:
            a, ga = mid, gm
        if b - a < z_tol:
            break
    return float(s * 0.5 * (a + b))


def _interp_q(q_curve: QuantumMomentumCurve, z: float) -> float | None:
    """Linear interpolation of q; valid only when both neighbors meet the
    density-floor mask."""
    zs = q_curve.z
    if z < zs[0] or z > zs[-1]:
        return None
    j = int(np.searchsorted(zs, z)) - 1
    j = max(0, min(j, len(zs) - 2))
    if not (q_curve.mask[j] and q_curve.mask[j + 1]):
        return None
    w = (z - zs[j]) / (zs[j + 1] - zs[j])
    return float((1 - w) * q_curve.q[j] + w * q_curve.q[j + 1])


def solve_initial_condition(t_s: float, q_curve: QuantumMomentumCurve,
                            pulse: PulseParams, bracket_width: float = 1.0,
                            eps: float = 1e-4, g_tol: float = 1e-6,
                            n_scan: int = 60) -> InitialCondition:
    """Match the flow momentum to a stationary curve at its outermost
    inflection point: find the unique E_s in (V_top, V_top + bracket_width]
    with q(z_i(E_s)) = p(z_i(E_s); E_s).

    Scan-bracket the residual, then bisect to |residual| <= g_tol. Raises
    NoBracketError (with the scanned residual table) when no sign change is
    found, signalling t_s outside the escape window.
    """
    geom = barrier_geometry(t_s, -0.5, pulse)
    s = downfield_sign(geom.E_field)
    z_max = abs(q_curve.z[0] if s < 0 else q_curve.z[-1])
    window = (geom.z_top, s * z_max)

    def residual(E):
        try:
            z_i = outermost_inflection(t_s, E, window, pulse)
        except NoInflectionError:
            return None, None
        q = _interp_q(q_curve, z_i)
        if q is None:
            return None, z_i
        p = stationary_momentum(z_i, t_s, E, pulse)
        if not np.isfinite(p):
            return None, z_i
        return float(s * q - p), z_i

    for width in (bracket_width, 2.0 * bracket_width):
        e_grid = geom.V_top + eps + (width - eps) * np.linspace(0.0, 1.0, n_scan)
        scan = [(e, *residual(e)) for e in e_grid]
        usable = [(e, g, zi) for (e, g, zi) in scan if g is not None]
        bracket = None
        for (e0, g0, _), (e1, g1, _) in zip(usable, usable[1:]):
            if g0 * g1 <= 0.0:
                bracket = (e0, g0, e1, g1)
                break
        if bracket is not None:
            break
    else:
        raise NoBracketError(
            f"no sign change of the seeding residual at t_s = {t_s}",
            scan=[(e, g) for (e, g, _) in scan])
    e0, g0, e1, g1 = bracket
    best = None
    for _ in range(80):
        mid = 0.5 * (e0 + e1)
        gm, z_mid = residual(mid)
        if gm is None:
            break
        if best is None or abs(gm) < best[1]:
            best = (mid, abs(gm), z_mid)
        if g0 * gm <= 0.0:
            e1 = mid
        else:
            e0, g0 = mid, gm
        if e1 - e0 < 1e-11:
            break
    if best is None or best[1] > g_tol:
        raise NoBracketError(
            f"seeding residual did not reach {g_tol} at t_s = {t_s} "
            f"(bracket [{e0}, {e1}])")
    e_s, g_best, z_i = best
    p0 = float(stationary_momentum(z_i, t_s, e_s, pulse))
    return InitialCondition(t_s=t_s, z_i=float(z_i), E_s=float(e_s),
                            p0=p0, residual=g_best)


def _coulomb_force(z: float) -> float:
    """-d/dz of -1/|z|, smoothly regularized inside |z| < 1: the softening
    length ramps from REG_EPS at |z| <= 0.9 to zero at |z| >= 1, so
    escape-side dynamics stay exact Coulomb."""
    az = abs(z)
    if az >= REG_ZONE:
        return -z / az**3
    u = np.clip((az - 0.9) / 0.1, 0.0, 1.0)
    w = 1.0 - (3 * u * u - 2 * u**3)
    eps = REG_EPS * w
    return -z / (z * z + eps * eps) ** 1.5


def propagate_trajectory(ic: InitialCondition, pulse: PulseParams,
                         until: float | None = None, rtol: float = 1e-10,
                         sample_dt: float = 0.5,
                         field=None) -> Trajectory:
    """Integrate dz/dt = p, dp/dt = -dV/dz from (z_i, p0, t_s) to `until`
    with adaptive RK45. `field` overrides the pulse field (for static-field
    checks)."""
    if until is None:
        until = pulse.duration
    if until <= ic.t_s:
        raise ValueError("propagation horizon must exceed the starting time")
    e_of_t = field if field is not None else (lambda t: field_at(pulse, t))

    def rhs(t, y):
        z, p = y
        return (p, _coulomb_force(z) - e_of_t(t))

    went_out = [abs(ic.z_i) > CORE_RADIUS]
    reentered = [False]

    def track(t, y):
        if abs(y[0]) > CORE_RADIUS:
            went_out[0] = True
        elif went_out[0]:
            reentered[0] = True
        return 1.0

    t_eval = np.arange(ic.t_s, until, sample_dt)
    t_eval = np.append(t_eval, until)
    sol = solve_ivp(rhs, (ic.t_s, until), [ic.z_i, ic.p0], method="RK45",
                    rtol=rtol, atol=1e-12, t_eval=t_eval, events=track,
                    dense_output=False, max_step=1.0)
    if not sol.success:
        raise RuntimeError(f"trajectory integration failed: {sol.message}")
    # event probes are not guaranteed at every step; re-check on the samples
    z_path = sol.y[0]
    outside = np.abs(z_path) > CORE_RADIUS
    if np.any(outside):
        first_out = int(np.argmax(outside))
        if np.any(np.abs(z_path[first_out:]) < CORE_RADIUS):
            reentered[0] = True
    z_f, p_f = float(sol.y[0][-1]), float(sol.y[1][-1])
    energy_f = 0.5 * p_f * p_f - 1.0 / abs(z_f)
    if reentered[0]:
        outcome = "rescatter"
    elif energy_f < 0.0:
        outcome = "recapture"
    elif p_f * np.sign(z_f) > 0.0:
        outcome = "direct-escape"
    else:
        outcome = "rescatter"
    return Trajectory(initial=ic, t=sol.t, z=sol.y[0].copy(), p=sol.y[1].copy(),
                      outcome=outcome, p_f=p_f, z_f=z_f, energy_f=energy_f,
                      reentered=reentered[0])


@dataclass
class EnsembleEntry:
    trajectory: Trajectory
    deviations: dict            # {t_compare: |p(t) - q(z(t), t)| or None}


def ensemble(t_s_list, q_snapshots, pulse: PulseParams,
             compare_times=()) -> list:
    """Seed, propagate and compare each trajectory against the flow momentum
    at the requested instants (where the density mask is valid)."""
    out = []
    for t_s in t_s_list:
        q_curve = q_snapshots.at(t_s)
        ic = solve_initial_condition(t_s, q_curve, pulse)
        traj = propagate_trajectory(ic, pulse)
        devs = {}
        for t_c in compare_times:
            if t_c < t_s:
                continue
            k = int(np.argmin(np.abs(traj.t - t_c)))
            qc = q_snapshots.at(t_c)
            qv = _interp_q(qc, traj.z[k])
            devs[t_c] = None if qv is None else abs(traj.p[k] - qv)
        out.append(EnsembleEntry(trajectory=traj, deviations=devs))
    return out
