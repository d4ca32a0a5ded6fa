"""Starting-time reconstruction from the detected asymptotic momentum.

An escaping electron detected with momentum p_d left the pulse at t_f = NT
with Coulomb momentum p_f and potential energy V_f, so
p_d = sqrt(p_f^2 + 2 V_f). Neglecting the Coulomb force, the final momentum
would have been p_NC = p_0 - int_{t_s}^{t_f} E_z dt (the force in this
artifact's convention is -dV/dz = -E_z). The two pictures are bridged by
p_NC = sqrt(p_d^2 - 2 (V_0 + dW)) with the combined term approximated by the
initial coordinate, V_0 + dW = -1/z_0. Since the seeding rule ties (z_0, p_0)
to the starting time, the residual

    r(t_s) = p_0(t_s) + impulse(t_s, NT) - sqrt(p_d^2 + 2 / z_0(t_s))

has a root at the starting time; it is bracketed by a coarse scan and solved
by a secant iteration that falls back to bisection inside the bracket.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .classical import (InitialCondition, Trajectory, propagate_trajectory,
                        solve_initial_condition)
from .errors import BoundElectronError, ConvergenceError, NoBracketError
from .model import PulseParams, field_at


@dataclass
class DetectionRecord:
    p_d: float
    t_s_true: float | None = None      # provenance for numerical experiments
    p_f: float | None = None
    z_f: float | None = None


@dataclass
class ReconstructionResult:
    p_d: float
    t_s_r: float
    z_0: float
    p_0: float
    iterations: int
    residual: float


def detect_momentum(traj: Trajectory) -> DetectionRecord:
    """Asymptotic momentum of a direct-escape trajectory read at the end of
    the pulse: p_d = sqrt(p_f^2 + 2 V_f) with V_f = -1/|z_f|."""
    if traj.outcome != "direct-escape":
        raise ValueError(f"detection needs a direct-escape trajectory, "
                         f"got {traj.outcome}")
    v_f = -1.0 / abs(traj.z_f)
    arg = traj.p_f**2 + 2.0 * v_f
    if arg < 0.0:
        raise BoundElectronError(
            f"final kinetic energy below the Coulomb deficit "
            f"(p_f = {traj.p_f:.4f}, z_f = {traj.z_f:.2f})")
    return DetectionRecord(p_d=float(np.sqrt(arg)),
                           t_s_true=traj.initial.t_s,
                           p_f=traj.p_f, z_f=traj.z_f)


def field_impulse(pulse: PulseParams, t_s: float, t_f: float,
                  epsabs: float = 1e-12, field=None) -> float:
    """Momentum gained from the field alone: -int_{t_s}^{t_f} E_z dt, by
    adaptive quadrature over the pulse support. A callable `field` overrides
    the pulse (static-field checks); the support clip then does not apply."""
    if t_f < t_s:
        raise ValueError("t_f must not precede t_s")
    if field is not None:
        lo, hi = t_s, t_f
    else:
        field = lambda t: field_at(pulse, t)  # noqa: E731
        lo = max(t_s, 0.0)
        hi = min(t_f, pulse.duration)
    if hi <= lo:
        return 0.0
    val, _ = quad(field, lo, hi, epsabs=epsabs, epsrel=1e-12, limit=400)
    return -float(val)


def reconstruct_ts(rec: DetectionRecord, pulse: PulseParams, q_snapshots,
                   window=(144.0, 164.0), scan_step: float = 1.0,
                   r_tol: float = 1e-6, t_tol: float = 1e-6,
                   budget: int = 50) -> ReconstructionResult:
    """Recover the starting time from a detected momentum.

    The residual is scanned across `window` on the seeding cadence to find a
    sign change (starting times where the seeding rule has no solution are
    skipped); the root is then polished by secant steps confined to the
    bracket, with bisection as fallback. Converged when |r| <= r_tol or the
    step shrinks below t_tol (the default keeps the residual inside its
    tolerance as well). A non-monotone residual inside the bracket is
    reported as a warning, not silently accepted.
    """
    t_f = pulse.duration
    cache: dict = {}

    def seed(t_s):
        key = round(t_s, 12)
        if key not in cache:
            try:
                cache[key] = solve_initial_condition(
                    t_s, q_snapshots.at(t_s), pulse)
            except (NoBracketError, ValueError):
                cache[key] = None
        return cache[key]

    def residual(t_s):
        ic = seed(t_s)
        if ic is None:
            return None, None
        return (ic.p0 + field_impulse(pulse, t_s, t_f)
                - np.sqrt(rec.p_d**2 + 2.0 / abs(ic.z_i))), ic

    evaluations = 0
    scan = []
    t = window[0]
    while t <= window[1] + 1e-9:
        r, _ = residual(t)
        evaluations += 1
        scan.append((t, r))
        t += scan_step
    usable = [(t, r) for (t, r) in scan if r is not None]
    bracket = None
    for (t0, r0), (t1, r1) in zip(usable, usable[1:]):
        if r0 * r1 <= 0.0 and t1 - t0 <= 1.5 * scan_step:
            bracket = [t0, r0, t1, r1]
            break
    if bracket is None:
        raise NoBracketError(
            f"no sign change of the reconstruction residual for "
            f"p_d = {rec.p_d:.4f} in {window}", scan=scan)
    a, ra, b, rb = bracket
    interior = [residual(a + f * (b - a))[0] for f in (0.25, 0.5, 0.75)]
    seq = [ra] + [r for r in interior if r is not None] + [rb]
    if any(x < y for x, y in zip(seq, seq[1:])) and \
            any(x > y for x, y in zip(seq, seq[1:])):
        import warnings

        warnings.warn(
            f"reconstruction residual is not monotone inside the bracket "
            f"[{a:.2f}, {b:.2f}] for p_d = {rec.p_d:.4f}", stacklevel=2)
    t_prev, r_prev = a, ra
    t_cur, r_cur = b, rb
    for it in range(1, budget + 1):
        if r_cur == r_prev:
            t_next = 0.5 * (a + b)
        else:
            t_next = t_cur - r_cur * (t_cur - t_prev) / (r_cur - r_prev)
            if not (a < t_next < b):
                t_next = 0.5 * (a + b)
        r_next, ic = residual(t_next)
        if r_next is None:
            t_next = 0.5 * (a + b)
            r_next, ic = residual(t_next)
            if r_next is None:
                raise ConvergenceError(
                    f"seeding became infeasible inside the bracket at "
                    f"t = {t_next:.4f}")
        if ra * r_next <= 0.0:
            b, rb = t_next, r_next
        else:
            a, ra = t_next, r_next
        converged = abs(r_next) <= r_tol or abs(t_next - t_cur) <= t_tol
        t_prev, r_prev = t_cur, r_cur
        t_cur, r_cur = t_next, r_next
        if converged:
            return ReconstructionResult(
                p_d=rec.p_d, t_s_r=float(t_cur), z_0=float(ic.z_i),
                p_0=float(ic.p0), iterations=it, residual=abs(r_cur))
    raise ConvergenceError(
        f"reconstruction exceeded {budget} iterations "
        f"(last bracket [{a:.4f}, {b:.4f}], residual {r_cur:.2e})")


@dataclass
class TableRow:
    t_s: float
    p_d: float | None
    t_s_r: float | None
    outcome: str
    note: str = ""


def table1_experiment(t_s_list, q_snapshots, pulse: PulseParams,
                      **reconstruct_kw) -> list:
    """Round-trip numerical experiment: seed -> classical propagation ->
    detected momentum -> reconstructed starting time, one row per t_s.
    Rows whose trajectories are not direct-escape are reported and skipped."""
    rows = []
    for t_s in t_s_list:
        try:
            ic = solve_initial_condition(t_s, q_snapshots.at(t_s), pulse)
        except NoBracketError as err:
            rows.append(TableRow(t_s=t_s, p_d=None, t_s_r=None,
                                 outcome="no-seed", note=str(err)))
            continue
        traj = propagate_trajectory(ic, pulse)
        if traj.outcome != "direct-escape":
            rows.append(TableRow(t_s=t_s, p_d=None, t_s_r=None,
                                 outcome=traj.outcome,
                                 note="skipped: not a direct escape"))
            continue
        rec = detect_momentum(traj)
        res = reconstruct_ts(rec, pulse, q_snapshots, **reconstruct_kw)
        rows.append(TableRow(t_s=t_s, p_d=rec.p_d, t_s_r=res.t_s_r,
                             outcome=traj.outcome))
    return rows
