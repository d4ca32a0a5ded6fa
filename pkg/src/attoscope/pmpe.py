"""Positive-momentum wave packet at the end of the pulse: bound-state
subtraction plus Fourier filtering of the non-positive p_z components, then
backward propagation and phase-space analysis of the result.

Subtraction and filtering do not commute, so a single pass of each leaves a
small admixture of the other's discarded subspace. build_pmpe therefore
finishes with a correction inside the positive-momentum subspace: it removes
the span of the filtered bound states by solving the small Gram system, which
lands the packet exactly in {no bound content} intersected with {p_z > 0}.
A second application is then a no-op to round-off, as the invariants require.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .model import PulseParams
from .phase_space import (QuantumMomentumCurve, WignerGrid,
                          conjugate_momentum_grid, quantum_momentum, reduce,
                          wigner)
from .tdse import BoundStateSet, PropagatorConfig, Wavefunction2D, propagate


@dataclass
class PMPEPacket:
    psi: Wavefunction2D
    norm: float                  # escape-probability proxy
    stage_norms: dict            # norm after each construction stage
    subtracted: list             # (n, l) labels removed
    iterations: int


def _positive_pz_filter(values: np.ndarray, dz: float) -> np.ndarray:
    """Zero all p_z <= 0 Fourier amplitudes along z, per radial line."""
    k = 2.0 * np.pi * np.fft.fftfreq(values.shape[0], dz)
    spec = np.fft.fft(values, axis=0)
    spec[k <= 0.0, :] = 0.0
    return np.fft.ifft(spec, axis=0)


def negative_pz_residue(psi: Wavefunction2D) -> float:
    """Max |amplitude| at p_z <= 0 relative to the spectral peak."""
    k = 2.0 * np.pi * np.fft.fftfreq(psi.values.shape[0], psi.grid.dz)
    spec = np.abs(np.fft.fft(psi.values, axis=0))
    peak = spec.max()
    if peak == 0.0:
        return 0.0
    return float(spec[k <= 0.0, :].max() / peak)


def build_pmpe(psi_final: Wavefunction2D, bounds: BoundStateSet,
               tol: float = 1e-10) -> PMPEPacket:
    """Project out the supplied bound states, keep only positive-p_z
    components, then cancel the bound content re-introduced by the filter
    using the filtered bound states themselves (exact intersection, see
    module docstring). The filter acts last in every step, so the returned
    packet carries no p_z <= 0 amplitude."""
    for b in bounds.states:
        if b.grid != psi_final.grid:
            raise ValueError("bound states live on a different grid "
                             "than the final state")
    g = psi_final.grid
    work = psi_final.copy()
    stage_norms = {"input": psi_final.norm2()}
    for b in bounds.states:
        work.values -= b.inner(work) * b.values
    stage_norms["after_subtraction"] = work.norm2()
    work.values = _positive_pz_filter(work.values, g.dz)
    stage_norms["after_filter"] = work.norm2()
    # correction inside the positive-p subspace: subtract span{P+ b_k} to
    # zero every <b_k | work> (small Gram system, well conditioned: the
    # diagonal of <b_i|P+ b_j> is ~ 1/2 for real bound states)
    m = len(bounds.states)
    filtered = [Wavefunction2D(g, _positive_pz_filter(b.values, g.dz), work.t)
                for b in bounds.states]
    gram = np.empty((m, m), dtype=complex)
    rhs = np.empty(m, dtype=complex)
    for i, b in enumerate(bounds.states):
        rhs[i] = b.inner(work)
        for j, f in enumerate(filtered):
            gram[i, j] = b.inner(f)
    coeff = np.linalg.solve(gram, rhs)
    for j, f in enumerate(filtered):
        work.values -= coeff[j] * f.values
    residual = max(abs(b.inner(work)) for b in bounds.states)
    scale = max(np.sqrt(stage_norms["input"]), 1e-30)
    if residual / scale > tol:
        raise ConvergenceError(
            f"bound-content cancellation left overlap {residual:.2e}")
    stage_norms["final"] = work.norm2()
    return PMPEPacket(psi=work, norm=stage_norms["final"],
                      stage_norms=stage_norms,
                      subtracted=list(bounds.labels), iterations=1)


def backpropagate_pmpe(pkt: PMPEPacket, pulse: PulseParams,
                       cfg: PropagatorConfig, snapshot_times=()) -> dict:
    """Propagate the packet backward from its own time to min(snapshot_times);
    returns {t: Wavefunction2D}. The absorber is forced off (the packet must
    stay inside the box on the analysis window)."""
    import dataclasses

    cfg_off = dataclasses.replace(cfg, absorber_on=False)
    t_end = min(snapshot_times) if snapshot_times else pkt.psi.t
    if t_end >= pkt.psi.t:
        raise ValueError("snapshot times must precede the packet time")
    delivered: list = []
    propagate(pkt.psi, pulse, cfg_off, pkt.psi.t, t_end,
              snapshot_times=snapshot_times, sink=delivered.append)
    snaps = {}
    for ts in snapshot_times:
        snaps[ts] = min(delivered, key=lambda wf: abs(wf.t - ts))
    return snaps


def pmpe_wigner(snapshot: Wavefunction2D, n_p: int | None = None,
                floor: float = 1e-8):
    """Reduced Wigner function and flow momentum of a PMPE snapshot."""
    rho = reduce(snapshot)
    if n_p is None:
        n_p = 2 * snapshot.grid.nz
    w = wigner(rho, conjugate_momentum_grid(snapshot.grid.dz, n_p))
    q = quantum_momentum(w, floor=floor)
    return w, q


def wigner_value_at(w: WignerGrid, z: float, p: float) -> float:
    """Bilinear sample of W at a phase-space point (candidate trajectory
    weight; normalization left undefined)."""
    iz = np.clip(np.searchsorted(w.z, z) - 1, 0, len(w.z) - 2)
    ip = np.clip(np.searchsorted(w.p, p) - 1, 0, len(w.p) - 2)
    fz = (z - w.z[iz]) / (w.z[iz + 1] - w.z[iz])
    fp = (p - w.p[ip]) / (w.p[ip + 1] - w.p[ip])
    fz, fp = np.clip(fz, 0, 1), np.clip(fp, 0, 1)
    v = w.values
    return float((1 - fz) * (1 - fp) * v[iz, ip] + fz * (1 - fp) * v[iz + 1, ip]
                 + (1 - fz) * fp * v[iz, ip + 1] + fz * fp * v[iz + 1, ip + 1])


def separatrix_population_split(w: WignerGrid, t: float, pulse: PulseParams):
    """Fractions of the reduced population with classical energy below and
    above the instantaneous barrier top (separatrix classification of every
    phase-space cell; signed Wigner weight)."""
    from .model import barrier_geometry, potential

    geom = barrier_geometry(t, -0.5, pulse)
    Z, P = np.meshgrid(w.z, w.p, indexing="ij")
    with np.errstate(divide="ignore"):
        e_cls = 0.5 * P**2 + potential(Z, np.zeros_like(Z) + 1e-12, t, pulse)
    below = e_cls < geom.V_top
    total = np.sum(w.values) * w.dz * w.dp
    frac_below = float(np.sum(w.values[below]) * w.dz * w.dp / total)
    return frac_below, 1.0 - frac_below
