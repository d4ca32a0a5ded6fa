"""Compiled inner loops for the split-step propagator.

All tridiagonal systems here have constant coefficients along the lines they
sweep (the potential is applied separately as an exact phase), so the Thomas
elimination factors are precomputed once per (dt, grid) and reused for every
line and every step. Lines are independent; writes are disjoint, which keeps
the parallel sweeps deterministic for any thread count.
"""
import numpy as np
from numba import njit, prange


@njit(cache=True)
def thomas_factor(lower, diag, upper):
    """Modified-upper diagonal and inverse pivots of a tridiagonal matrix
    given by its three diagonals (lower[0] and upper[-1] are unused)."""
    n = diag.shape[0]
    cp = np.empty(n, dtype=np.complex128)
    dinv = np.empty(n, dtype=np.complex128)
    dinv[0] = 1.0 / diag[0]
    cp[0] = upper[0] * dinv[0]
    for i in range(1, n):
        dinv[i] = 1.0 / (diag[i] - lower[i] * cp[i - 1])
        cp[i] = upper[i] * dinv[i]
    return cp, dinv


@njit(cache=True, parallel=True)
def cn_sweep_axis0(psi, rl, rd, ru, lower, cp, dinv):
    """In-place Crank-Nicolson sub-step along axis 0:
    psi <- LHS^{-1} (RHS psi), RHS tridiagonal (rl, rd, ru), LHS given by its
    Thomas factors (lower, cp, dinv). Columns are independent."""
    n, m = psi.shape
    for j in prange(m):
        prev_old = psi[0, j]
        b = rd[0] * prev_old + ru[0] * psi[1, j]
        y = b * dinv[0]
        psi[0, j] = y
        for i in range(1, n - 1):
            cur_old = psi[i, j]
            b = rl[i] * prev_old + rd[i] * cur_old + ru[i] * psi[i + 1, j]
            y = (b - lower[i] * y) * dinv[i]
            psi[i, j] = y
            prev_old = cur_old
        b = rl[n - 1] * prev_old + rd[n - 1] * psi[n - 1, j]
        y = (b - lower[n - 1] * y) * dinv[n - 1]
        psi[n - 1, j] = y
        for i in range(n - 2, -1, -1):
            psi[i, j] = psi[i, j] - cp[i] * psi[i + 1, j]


@njit(cache=True, parallel=True)
def cn_sweep_axis1(psi, rl, rd, ru, lower, cp, dinv):
    """Same as cn_sweep_axis0 but sweeping along axis 1 (contiguous rows)."""
    n, m = psi.shape
    for i in prange(n):
        prev_old = psi[i, 0]
        b = rd[0] * prev_old + ru[0] * psi[i, 1]
        y = b * dinv[0]
        psi[i, 0] = y
        for j in range(1, m - 1):
            cur_old = psi[i, j]
            b = rl[j] * prev_old + rd[j] * cur_old + ru[j] * psi[i, j + 1]
            y = (b - lower[j] * y) * dinv[j]
            psi[i, j] = y
            prev_old = cur_old
        b = rl[m - 1] * prev_old + rd[m - 1] * psi[i, m - 1]
        y = (b - lower[m - 1] * y) * dinv[m - 1]
        psi[i, m - 1] = y
        for j in range(m - 2, -1, -1):
            psi[i, j] = psi[i, j] - cp[j] * psi[i, j + 1]


@njit(cache=True, parallel=True)
def itp_sweep_axis0(psi, out, rl, rd, ru, v2d, ll, ld, lu, dtau):
    """Imaginary-time ADI half-step along axis 0 with half the potential folded
    into both sides: out <- (1 + dtau/2 (K0 + V/2))^{-1} (1 - dtau/2 (K1 + V/2)) psi,
    where (rl, rd, ru) is the kinetic operator of the *other* axis (applied along
    axis 1 here) and (ll, ld, lu) the kinetic operator of this axis."""
    n, m = psi.shape
    h = 0.5 * dtau
    for j in prange(m):
        for i in range(n):
            acc = rd[j] * psi[i, j]
            if j > 0:
                acc += rl[j] * psi[i, j - 1]
            if j < m - 1:
                acc += ru[j] * psi[i, j + 1]
            out[i, j] = psi[i, j] - h * (acc + 0.5 * v2d[i, j] * psi[i, j])
        # Thomas solve along i with per-line diagonal (potential varies with i)
        cp = np.empty(n, dtype=np.complex128)
        beta = 1.0 + h * (ld[0] + 0.5 * v2d[0, j])
        cp[0] = h * lu[0] / beta
        out[0, j] = out[0, j] / beta
        for i in range(1, n):
            a = h * ll[i]
            beta = 1.0 + h * (ld[i] + 0.5 * v2d[i, j]) - a * cp[i - 1]
            cp[i] = h * lu[i] / beta
            out[i, j] = (out[i, j] - a * out[i - 1, j]) / beta
        for i in range(n - 2, -1, -1):
            out[i, j] = out[i, j] - cp[i] * out[i + 1, j]


@njit(cache=True, parallel=True)
def itp_sweep_axis1(psi, out, rl, rd, ru, v2d, ll, ld, lu, dtau):
    """Imaginary-time ADI half-step along axis 1 (mirror of itp_sweep_axis0)."""
    n, m = psi.shape
    h = 0.5 * dtau
    for i in prange(n):
        for j in range(m):
            acc = rd[i] * psi[i, j]
            if i > 0:
                acc += rl[i] * psi[i - 1, j]
            if i < n - 1:
                acc += ru[i] * psi[i + 1, j]
            out[i, j] = psi[i, j] - h * (acc + 0.5 * v2d[i, j] * psi[i, j])
        cp = np.empty(m, dtype=np.complex128)
        beta = 1.0 + h * (ld[0] + 0.5 * v2d[i, 0])
        cp[0] = h * lu[0] / beta
        out[i, 0] = out[i, 0] / beta
        for j in range(1, m):
            a = h * ll[j]
            beta = 1.0 + h * (ld[j] + 0.5 * v2d[i, j]) - a * cp[j - 1]
            cp[j] = h * lu[j] / beta
            out[i, j] = (out[i, j] - a * out[i, j - 1]) / beta
        for j in range(m - 2, -1, -1):
            out[i, j] = out[i, j] - cp[j] * out[i, j + 1]
