"""Laser pulse, atomic potential, grids and derived barrier quantities.

Atomic units throughout (hbar = m_e = e = 1). The interaction enters the
potential as +E_z(t) * z, so the classical force on the electron is
-dV/dz = -z/r^3 - E_z(t).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoBarrierError, NumericalError, SingularOriginError


@dataclass(frozen=True)
class PulseParams:
    """sin^2-envelope pulse: F sin^2(pi t / NT) cos(2 pi t / T + phi) on [0, NT]."""

    F: float = 0.06
    T: float = 110.0
    N: int = 3
    phi: float = 0.0

    def __post_init__(self):
        if self.F <= 0:
            raise ValueError("field amplitude F must be positive")
        if self.T <= 0:
            raise ValueError("optical period T must be positive")
        if self.N < 1:
            raise ValueError("cycle count N must be >= 1")

    @property
    def duration(self) -> float:
        return self.N * self.T

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.T

    def field(self, t):
        return field_at(self, t)


@dataclass(frozen=True)
class GridSpec2D:
    """Cylindrical (z, rho) grid. Radial nodes sit at rho_j = (j + 1/2) drho,
    so rho = 0 is never sampled and the bare Coulomb potential stays finite
    on every node."""

    z_min: float = -120.0
    z_max: float = 120.0
    dz: float = 0.4
    rho_max: float = 60.0
    drho: float = 0.4

    def __post_init__(self):
        if not (self.z_min < 0.0 < self.z_max):
            raise ValueError("grid must straddle z = 0")
        if self.dz <= 0 or self.drho <= 0:
            raise ValueError("grid spacings must be positive")

    @property
    def nz(self) -> int:
        return int(round((self.z_max - self.z_min) / self.dz)) + 1

    @property
    def nrho(self) -> int:
        return int(round(self.rho_max / self.drho))

    @property
    def z(self) -> np.ndarray:
        return self.z_min + self.dz * np.arange(self.nz)

    @property
    def rho(self) -> np.ndarray:
        return (np.arange(self.nrho) + 0.5) * self.drho


@dataclass
class BarrierGeometry:
    """Instantaneous barrier of the field-suppressed Coulomb potential on the
    downfield half-axis. Turning points are present only when E <= V_top;
    all positions carry the sign of the downfield side."""

    t: float
    E_field: float
    z_top: float
    V_top: float
    z_entrance: float | None = None
    z_exit: float | None = None

    @property
    def has_turning_points(self) -> bool:
        return self.z_entrance is not None


def field_at(p: PulseParams, t):
    """Electric field E_z(t); exactly zero outside [0, N T]. Accepts scalars
    or arrays."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < p.duration)
    env = np.sin(np.pi * t / p.duration) ** 2
    carrier = np.cos(2.0 * np.pi * t / p.T + p.phi)
    out = np.where(inside, p.F * env * carrier, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def potential(z, rho, t, p: PulseParams):
    """V(z, rho, t) = -1/sqrt(z^2 + rho^2) + E_z(t) z. Scalar or array inputs."""
    z = np.asarray(z, dtype=float)
    rho = np.asarray(rho, dtype=float)
    r2 = z**2 + rho**2
    if np.any(r2 == 0.0):
        raise SingularOriginError("potential is singular at z = rho = 0")
    out = -1.0 / np.sqrt(r2) + field_at(p, t) * z
    if out.ndim == 0:
        return float(out)
    return out


def keldysh_gamma(p: PulseParams, ionization_potential: float = 0.5) -> float:
    """gamma = omega sqrt(2 I_p) / F with omega = 2 pi / T."""
    return p.omega * np.sqrt(2.0 * ionization_potential) / p.F


def downfield_sign(e_field: float) -> float:
    """Sign of the half-axis where the potential is suppressed (E_z * z < 0)."""
    return -np.sign(e_field)


def barrier_geometry(t: float, E: float, p: PulseParams,
                     root_tol: float = 1e-10) -> BarrierGeometry:
    """Barrier top and the classical turning points of V(z, 0, t) = E on the
    downfield side. On that side, with zeta = |z| and a = |E_z|, the turning
    points solve a zeta^2 + E zeta + 1 = 0; real roots exist iff E <= -2 sqrt(a).
    """
    e_field = field_at(p, t)
    if e_field == 0.0:
        raise NoBarrierError(f"field vanishes at t = {t}; no barrier defined")
    a = abs(e_field)
    s = downfield_sign(e_field)
    z_top = s / np.sqrt(a)
    v_top = -2.0 * np.sqrt(a)
    geom = BarrierGeometry(t=t, E_field=e_field, z_top=z_top, V_top=v_top)
    disc = E * E - 4.0 * a
    if E <= v_top and disc >= 0.0:
        # stable quadratic roots: zeta = (-E -/+ sqrt(E^2 - 4a)) / (2a)
        q = -0.5 * (E - np.sqrt(disc))  # E < 0 here
        zeta_outer = q / a
        zeta_inner = 1.0 / q
        geom.z_entrance = s * min(zeta_inner, zeta_outer)
        geom.z_exit = s * max(zeta_inner, zeta_outer)
        for zeta in (zeta_inner, zeta_outer):
            resid = abs(a * zeta * zeta + E * zeta + 1.0)
            if resid > root_tol * max(1.0, abs(E) * zeta):
                raise NumericalError(
                    f"turning-point residual {resid:.2e} exceeds {root_tol:.0e}")
    return geom


def v_top_numeric(t: float, p: PulseParams) -> float:
    """Barrier-top energy found by direct 1D maximization of V(z, 0, t) on the
    downfield half-axis (oracle for the analytic formula)."""
    from scipy.optimize import minimize_scalar

    e_field = field_at(p, t)
    if e_field == 0.0:
        raise NoBarrierError(f"field vanishes at t = {t}")
    s = downfield_sign(e_field)
    a = abs(e_field)
    zeta_guess = 1.0 / np.sqrt(a)
    res = minimize_scalar(
        lambda zeta: -potential(s * zeta, 0.0, t, p),
        bracket=(0.5 * zeta_guess, zeta_guess, 2.0 * zeta_guess),
        method="brent", options={"xtol": 1e-12},
    )
    return -res.fun
