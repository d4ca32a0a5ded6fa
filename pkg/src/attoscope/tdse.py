"""Ground-state preparation and unitary propagation of the cylindrical
Schrödinger equation

    i dPsi/dt = [ -1/2 (d2/dz2 + d2/drho2 + (1/rho) d/drho) + V(z, rho, t) ] Psi

on the half-offset (z, rho) grid.

Scheme: Strang composition  phase(dt/2) Kz(dt/2) Krho(dt) Kz(dt/2) phase(dt/2)
with the potential applied as an exact pointwise phase and the two kinetic
sub-steps as Crank-Nicolson/Cayley transforms of constant-coefficient
tridiagonal operators. Every factor is unitary under the cylindrical
quadrature norm, so the norm is conserved to round-off and a backward sweep
with -dt inverts a forward sweep exactly.

The radial operator is the finite-volume form

    (L psi)_j = [rho_{j+1/2}(psi_{j+1}-psi_j) - rho_{j-1/2}(psi_j-psi_{j-1})]
                / (rho_j drho^2),

whose flux through rho = 0 vanishes identically on the half-offset grid (the
regularity condition at the axis); it is self-adjoint under the rho-weighted
inner product.

The Coulomb term is sampled pointwise except in the three cells adjacent to
the origin, where the exact cell average of -1/r replaces the midpoint value.
This removes the dominant singular-sampling bias of the ground-state energy
(measured at dz = drho = 0.2: error -2.1e-2 pointwise vs -3.5e-3 averaged,
decaying monotonically under refinement).
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError, PropagationUnstableError
from .model import GridSpec2D, PulseParams, field_at



def _set_threads_from_env():
    n = os.environ.get("ATTOSCOPE_THREADS")
    if n:
        import numba

        numba.set_num_threads(max(1, int(n)))


@dataclass
class PropagatorConfig:
    dt: float = 0.04
    absorber_on: bool = True
    absorber_frac: float = 0.1          # fraction of each box edge
    absorber_strength: float = 0.3      # peak damping rate (a.u.)
    itp_dtau: float = 0.3
    itp_tol: float = 1e-10              # energy drift per unit imaginary time
    itp_max_steps: int = 20000

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not (0.0 <= self.absorber_frac < 0.5):
            raise ValueError("absorber_frac must lie in [0, 0.5)")


@dataclass
class Wavefunction2D:
    grid: GridSpec2D
    values: np.ndarray
    t: float = 0.0

    def copy(self) -> "Wavefunction2D":
        return Wavefunction2D(self.grid, self.values.copy(), self.t)

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights of the cylindrical norm, shape (nrho,)."""
        return 2.0 * np.pi * self.grid.rho * self.grid.drho * self.grid.dz

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2 * self.weights[None, :]))

    def inner(self, other: "Wavefunction2D") -> complex:
        return complex(np.sum(np.conj(self.values) * other.values
                              * self.weights[None, :]))

    def normalized(self) -> "Wavefunction2D":
        return Wavefunction2D(self.grid, self.values / np.sqrt(self.norm2()), self.t)


@dataclass
class BoundStateSet:
    """Field-free m = 0 eigenstates on the propagation grid, orthonormal under
    the cylindrical inner product. Degenerate multiplets may mix on the grid;
    labels are assigned by best overlap with the analytic hydrogen states."""

    labels: list
    states: list
    energies: np.ndarray

    def __len__(self):
        return len(self.states)


_SOLVER_CACHE: dict = {}


def get_solver(grid: GridSpec2D) -> "CylindricalSolver":
    s = _SOLVER_CACHE.get(grid)
    if s is None:
        s = CylindricalSolver(grid)
        _SOLVER_CACHE[grid] = s
    return s


class CylindricalSolver:
    """Owns the discrete operators for one grid."""

    def __init__(self, grid: GridSpec2D):
        _set_threads_from_env()
        self.grid = grid
        rho = grid.rho
        dz, drho = grid.dz, grid.drho
        nz = grid.nz
        # z kinetic: -1/2 d2/dz2, 3-point, Dirichlet box ends
        self._kz = (np.full(nz, -0.5 / dz**2), np.full(nz, 1.0 / dz**2),
                    np.full(nz, -0.5 / dz**2))
        # radial kinetic: finite-volume form (module docstring)
        rp, rm = rho + drho / 2, rho - drho / 2
        self._kr = (-0.5 * rm / (rho * drho**2),
                    0.5 * (rp + rm) / (rho * drho**2),
                    -0.5 * rp / (rho * drho**2))
        self._vcoul = self._coulomb_on_grid()
        self._cn_cache: dict = {}
        self._damp_cache: dict = {}

    # ---- discrete potential --------------------------------------------
    @staticmethod
    def _coulomb_cell_average(z0, z1, r0, r1) -> float:
        """Exact volume average of -1/r over the cylindrical-shell cell
        [z0, z1] x [r0, r1] (closed form; the integrand is integrable even
        when the cell touches the origin)."""

        def f(z, c):
            # antiderivative of sqrt(z^2 + c^2) in z
            if c == 0.0:
                return 0.5 * z * abs(z)
            return 0.5 * (z * np.sqrt(z * z + c * c)
                          + c * c * np.arcsinh(z / c))

        num = -((f(z1, r1) - f(z0, r1)) - (f(z1, r0) - f(z0, r0)))
        den = 0.5 * (r1 * r1 - r0 * r0) * (z1 - z0)
        return float(num / den)

    def _coulomb_on_grid(self) -> np.ndarray:
        g = self.grid
        Z, R = np.meshgrid(g.z, g.rho, indexing="ij")
        v = -1.0 / np.sqrt(Z**2 + R**2)
        for i in np.flatnonzero(np.abs(g.z) <= g.dz + 1e-12):
            zi = g.z[i]
            v[i, 0] = self._coulomb_cell_average(
                zi - g.dz / 2, zi + g.dz / 2, 0.0, g.drho)
        return v

    def damping(self, frac: float) -> np.ndarray:
        """Damping rate profile (unit peak), sin^8-shaped over the outer
        `frac` of each boundary, at least 10 grid points wide."""
        key = frac
        d = self._damp_cache.get(key)
        if d is not None:
            return d
        g = self.grid
        width_z = max(frac * (g.z_max - g.z_min) / 2.0, 10 * g.dz)
        width_r = max(frac * g.rho_max, 10 * g.drho)

        def ramp(x, edge, width):
            s = np.clip((x - (edge - width)) / width, 0.0, 1.0)
            return np.sin(0.5 * np.pi * s) ** 8

        gz = ramp(np.abs(g.z), g.z_max, width_z)
        gr = ramp(g.rho, g.rho[-1] + g.drho / 2, width_r)
        d = gz[:, None] + gr[None, :]
        self._damp_cache[key] = d
        return d

    def potential_grid(self, t: float, pulse: PulseParams | None) -> np.ndarray:
        if pulse is None:
            return self._vcoul
        e = field_at(pulse, t)
        if e == 0.0:
            return self._vcoul
        return self._vcoul + e * self.grid.z[:, None]

    # ---- discrete Hamiltonian -------------------------------------------
    def apply_h(self, values: np.ndarray, t: float = 0.0,
                pulse: PulseParams | None = None) -> np.ndarray:
        az = self._kz[0][0]          # constant off-diagonal
        dzd = self._kz[1][0]
        out = dzd * values.astype(complex, copy=True)
        out[1:] += az * values[:-1]
        out[:-1] += az * values[1:]
        bl, bd, bu = self._kr
        out += bd[None, :] * values
        out[:, 1:] += bl[None, 1:] * values[:, :-1]
        out[:, :-1] += bu[None, :-1] * values[:, 1:]
        out += self.potential_grid(t, pulse) * values
        return out

    # ---- real-time stepping ----------------------------------------------
    def _cn_factors(self, dt_abs: float):
        fac = self._cn_cache.get(dt_abs)
        if fac is None:
            half = 0.5j * (dt_abs / 2)
            full = 0.5j * dt_abs
            al, ad, au = [np.asarray(x, dtype=complex) for x in self._kz]
            z_lhs = (half * al, 1.0 + half * ad, half * au)
            z_rhs = (-half * al, 1.0 - half * ad, -half * au)
            z_cp, z_dinv = _kernels.thomas_factor(*z_lhs)
            bl, bd, bu = [np.asarray(x, dtype=complex) for x in self._kr]
            r_lhs = (full * bl, 1.0 + full * bd, full * bu)
            r_rhs = (-full * bl, 1.0 - full * bd, -full * bu)
            r_cp, r_dinv = _kernels.thomas_factor(*r_lhs)
            fac = (z_rhs, z_lhs[0], z_cp, z_dinv, r_rhs, r_lhs[0], r_cp, r_dinv)
            self._cn_cache[dt_abs] = fac
        return fac

    def step(self, values: np.ndarray, t: float, dt: float,
             pulse: PulseParams | None, damp: np.ndarray | None) -> np.ndarray:
        """Advance by one (possibly negative) step, in place."""
        z_rhs, z_low, z_cp, z_dinv, r_rhs, r_low, r_cp, r_dinv = \
            self._cn_factors(abs(dt))
        if dt < 0:
            # Cayley factors of -dt are the complex conjugates: exact inverse
            z_rhs = tuple(np.conj(c) for c in z_rhs)
            z_low, z_cp, z_dinv = np.conj(z_low), np.conj(z_cp), np.conj(z_dinv)
            r_rhs = tuple(np.conj(c) for c in r_rhs)
            r_low, r_cp, r_dinv = np.conj(r_low), np.conj(r_cp), np.conj(r_dinv)
        v = self.potential_grid(t + dt / 2, pulse)
        phase = np.exp(-0.5j * dt * v)
        if damp is not None:
            phase = phase * np.exp(-0.5 * abs(dt) * damp)
        values *= phase
        _kernels.cn_sweep_axis0(values, *z_rhs, z_low, z_cp, z_dinv)
        _kernels.cn_sweep_axis1(values, *r_rhs, r_low, r_cp, r_dinv)
        _kernels.cn_sweep_axis0(values, *z_rhs, z_low, z_cp, z_dinv)
        values *= phase
        return values

    # ---- imaginary time ----------------------------------------------------
    def itp_step(self, values: np.ndarray, dtau: float) -> np.ndarray:
        """One ADI relaxation step of exp(-dtau H) with half the potential in
        each directional solve. Not norm-preserving; callers renormalize."""
        v = self._vcoul
        zl, zd, zu = self._kz
        rl, rd, ru = self._kr
        out = np.empty_like(values)
        _kernels.itp_sweep_axis0(values, out, rl, rd, ru, v, zl, zd, zu, dtau)
        out2 = np.empty_like(values)
        _kernels.itp_sweep_axis1(out, out2, zl, zd, zu, v, rl, rd, ru, dtau)
        return out2


# ---- inner products on raw arrays -------------------------------------------

def _weights(grid: GridSpec2D) -> np.ndarray:
    return 2.0 * np.pi * grid.rho * grid.drho * grid.dz


def _inner(grid, a, b) -> complex:
    return complex(np.sum(np.conj(a) * b * _weights(grid)[None, :]))


def _norm2(grid, a) -> float:
    return float(np.sum(np.abs(a) ** 2 * _weights(grid)[None, :]))


def _rayleigh(solver, grid, a) -> float:
    return (_inner(grid, a, solver.apply_h(a)) / _norm2(grid, a)).real


def _symmetrize_z(grid: GridSpec2D, values: np.ndarray, parity: int) -> np.ndarray:
    """Project onto even/odd z-parity when the grid is symmetric about z = 0."""
    if abs(grid.z_min + grid.z_max) > 1e-12:
        return values
    return 0.5 * (values + parity * values[::-1, :])


def _ritz_polish(solver, grid, seeds, rounds=40):
    """Rayleigh-Ritz in the block Krylov space span{X, HX, ..., H^rounds X}
    built from the seed block X, with full reorthogonalization. Returns the
    lowest len(seeds) Ritz vectors/values of the discrete field-free H."""
    k_target = len(seeds)
    basis: list = []
    fresh = list(seeds)
    for depth in range(rounds + 1):
        added = []
        for w in fresh:
            w = w.astype(complex)
            for _ in range(2):
                for v in basis:
                    w = w - _inner(grid, v, w) * v
            nw = np.sqrt(_norm2(grid, w))
            if nw > 1e-10:
                w = w / nw
                basis.append(w)
                added.append(w)
        if depth == rounds or not added:
            break
        fresh = [solver.apply_h(w) for w in added]
    m = len(basis)
    hm = np.zeros((m, m), dtype=complex)
    for i in range(m):
        hv = solver.apply_h(basis[i])
        for j in range(m):
            hm[j, i] = _inner(grid, basis[j], hv)
    hm = 0.5 * (hm + hm.conj().T)
    evals, evecs = np.linalg.eigh(hm)
    out_states, out_energies = [], []
    for k in range(k_target):
        vec = sum(evecs[j, k] * basis[j] for j in range(m))
        vec /= np.sqrt(_norm2(grid, vec))
        out_states.append(vec)
        out_energies.append(evals[k])
    return out_states, np.array(out_energies)


def _relax(solver, grid, seed, deflate, cfg: PropagatorConfig):
    """Annealed imaginary-time relaxation with Gram-Schmidt deflation."""
    psi = seed.astype(complex)
    for v in deflate:
        psi = psi - _inner(grid, v, psi) * v
    psi /= np.sqrt(_norm2(grid, psi))
    e_prev = np.inf
    steps_done = 0
    for dtau in (cfg.itp_dtau, cfg.itp_dtau / 4, cfg.itp_dtau / 16):
        stale = 0
        while steps_done < cfg.itp_max_steps:
            psi = solver.itp_step(psi, dtau)
            for v in deflate:
                psi = psi - _inner(grid, v, psi) * v
            psi /= np.sqrt(_norm2(grid, psi))
            steps_done += 1
            if steps_done % 10 == 0:
                e = _rayleigh(solver, grid, psi)
                if abs(e - e_prev) < cfg.itp_tol * 10 * dtau:
                    stale += 1
                    if stale >= 2:
                        break
                else:
                    stale = 0
                e_prev = e
        else:
            raise ConvergenceError(
                f"imaginary-time relaxation exhausted {cfg.itp_max_steps} steps "
                f"(last energy drift {abs(e_prev - _rayleigh(solver, grid, psi)):.2e})")
    return psi


def ground_state(grid: GridSpec2D, cfg: PropagatorConfig | None = None):
    """Relax to the field-free ground state; returns (Wavefunction2D, energy).

    Imaginary-time relaxation with per-step renormalization, annealed time
    step, then a Rayleigh-Ritz polish so the returned state is an eigenvector
    of the discrete Hamiltonian to ~1e-10 residual. Energy is the Rayleigh
    quotient.
    """
    if grid.z_max - grid.z_min < 20.0 or grid.rho_max < 10.0:
        raise ValueError("grid too small to contain the 1s orbital "
                         "(need z extent >= 20, rho extent >= 10)")
    cfg = cfg or PropagatorConfig()
    solver = get_solver(grid)
    Z, R = np.meshgrid(grid.z, grid.rho, indexing="ij")
    seed = np.exp(-np.sqrt(Z**2 + R**2))
    psi = _relax(solver, grid, seed, [], cfg)
    states, energies = _ritz_polish(solver, grid, [psi], rounds=40)
    psi = _symmetrize_z(grid, states[0], +1)
    psi /= np.sqrt(_norm2(grid, psi))
    wf = Wavefunction2D(grid, psi, 0.0)
    return wf, float(_rayleigh(solver, grid, psi))


def _hydrogen_analytic(n: int, ell: int, Z, R):
    """Analytic hydrogen (n, l, m=0) orbital sampled on the grid (unnormalized)."""
    from scipy.special import eval_genlaguerre, eval_legendre

    r = np.sqrt(Z**2 + R**2)
    r = np.where(r == 0.0, 1e-30, r)
    x = 2.0 * r / n
    rad = x**ell * np.exp(-r / n) * eval_genlaguerre(n - ell - 1, 2 * ell + 1, x)
    return rad * eval_legendre(ell, Z / r)


def bound_states(grid: GridSpec2D, cfg: PropagatorConfig | None = None,
                 n_max: int = 4, overlap_tol: float = 1e-6) -> BoundStateSet:
    """All m = 0 field-free eigenstates with n <= n_max on the propagation grid.

    Deflated imaginary-time relaxation seeded by the analytic orbitals, then a
    block Rayleigh-Ritz rotation of the whole set (which also resolves the
    grid-split degenerate multiplets). States come back orthonormal under the
    cylindrical inner product.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    cfg = cfg or PropagatorConfig()
    solver = get_solver(grid)
    Z, R = np.meshgrid(grid.z, grid.rho, indexing="ij")
    nominal = [(n, ell) for n in range(1, n_max + 1) for ell in range(n)]
    # relax parity sectors separately; z-parity of (n, l, m=0) is (-1)^l
    raw = []
    for (n, ell) in nominal:
        seed = _hydrogen_analytic(n, ell, Z, R)
        seed = _symmetrize_z(grid, seed, +1 if ell % 2 == 0 else -1)
        deflate = [s for _, s in raw]
        psi = _relax(solver, grid, seed, deflate, cfg)
        raw.append(((n, ell), psi))
    states, energies = _ritz_polish(solver, grid, [s for _, s in raw], rounds=5)
    order = np.argsort(energies)
    states = [states[k] for k in order]
    energies = energies[order]
    # orthonormality guard (the Ritz rotation should guarantee this)
    for i in range(len(states)):
        for j in range(i):
            ov = abs(_inner(grid, states[i], states[j]))
            if ov > overlap_tol:
                raise ConvergenceError(
                    f"degeneracy resolution failed: |<{i}|{j}>| = {ov:.2e}")
    # label by best overlap with the analytic orbitals
    labels = []
    used = set()
    for s in states:
        best, best_ov = None, -1.0
        for (n, ell) in nominal:
            if (n, ell) in used:
                continue
            ref = _hydrogen_analytic(n, ell, Z, R)
            ref = ref / np.sqrt(_norm2(grid, ref))
            ov = abs(_inner(grid, ref, s))
            if ov > best_ov:
                best, best_ov = (n, ell), ov
        used.add(best)
        labels.append(best)
    wfs = [Wavefunction2D(grid, s, 0.0) for s in states]
    return BoundStateSet(labels=labels, states=wfs, energies=energies)


def propagate(psi: Wavefunction2D, pulse: PulseParams | None,
              cfg: PropagatorConfig, t_from: float, t_to: float,
              snapshot_times=(), sink=None,
              norm_guard: float = 1e-6) -> Wavefunction2D:
    """Propagate from t_from to t_to (backward when t_to < t_from).

    Snapshots: `sink(wf_copy)` is called at the step closest to each requested
    time (and at t_from itself when requested). The callback receives a copy;
    mutating it cannot affect the propagation.
    """
    if t_to == t_from:
        raise ValueError("t_from and t_to must differ")
    solver = get_solver(psi.grid)
    span = t_to - t_from
    n_steps = max(1, int(round(abs(span) / cfg.dt)))
    dt = span / n_steps
    damp = None
    if cfg.absorber_on and cfg.absorber_strength > 0.0:
        damp = cfg.absorber_strength * solver.damping(cfg.absorber_frac)
    wf = psi.copy()
    wf.t = t_from
    # map each snapshot time to the step index after which it is delivered
    deliveries = {}
    for ts in snapshot_times:
        k = int(round((ts - t_from) / dt))
        if 0 <= k <= n_steps:
            deliveries.setdefault(k, ts)
    if sink is not None and 0 in deliveries:
        sink(wf.copy())
    norm_prev = wf.norm2()
    for k in range(1, n_steps + 1):
        t = t_from + (k - 1) * dt
        solver.step(wf.values, t, dt, pulse, damp)
        wf.t = t_from + k * dt
        norm_now = wf.norm2()
        if norm_now > norm_prev * (1.0 + norm_guard):
            raise PropagationUnstableError(
                f"norm grew by {norm_now / norm_prev - 1.0:.2e} in one step at t = {wf.t}")
        norm_prev = norm_now
        if sink is not None and k in deliveries:
            sink(wf.copy())
    return wf


# ---- expectation values ------------------------------------------------------

def expectation_z(psi: Wavefunction2D) -> float:
    w = psi.weights
    dens = np.sum(np.abs(psi.values) ** 2 * w[None, :], axis=1)
    return float(np.sum(dens * psi.grid.z) / psi.norm2())


def expectation_pz(psi: Wavefunction2D, stencil: str = "centered") -> float:
    """<p_z> along z.

    The default centered difference is the exact conjugate of the discrete
    dynamics (i [K, z] for the 3-point kinetic), so Ehrenfest relations hold
    to the splitting error. stencil="spectral" uses the FFT derivative, which
    matches the phase-space first-moment convention instead."""
    w = psi.weights
    v = psi.values
    if stencil == "centered":
        dpsi = np.zeros_like(v)
        dpsi[1:-1] = (v[2:] - v[:-2]) / (2.0 * psi.grid.dz)
    elif stencil == "spectral":
        k = 2.0 * np.pi * np.fft.fftfreq(v.shape[0], psi.grid.dz)
        dpsi = np.fft.ifft(1.0j * k[:, None] * np.fft.fft(v, axis=0), axis=0)
    else:
        raise ValueError(f"unknown stencil {stencil!r}")
    val = np.sum(np.conj(v) * dpsi * w[None, :])
    return float(val.imag / psi.norm2())


def expectation_force_z(psi: Wavefunction2D, t: float,
                        pulse: PulseParams | None) -> float:
    """<-dV/dz> on the grid (Coulomb part analytic, field part exact)."""
    g = psi.grid
    Z, R = np.meshgrid(g.z, g.rho, indexing="ij")
    r3 = (Z**2 + R**2) ** 1.5
    force = -Z / r3
    if pulse is not None:
        force = force - field_at(pulse, t)
    w = psi.weights
    val = np.sum(np.abs(psi.values) ** 2 * force * w[None, :])
    return float(val / psi.norm2())
