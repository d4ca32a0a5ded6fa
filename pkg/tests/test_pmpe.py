import numpy as np
import pytest

from attoscope import PropagatorConfig, PulseParams, bound_states
from attoscope import pmpe as pm
from attoscope.phase_space import moments, momentum_distribution
from attoscope.tdse import Wavefunction2D, expectation_pz, expectation_z
from tests.conftest import DESK_DT, SMALL_GRID

PULSE = PulseParams()


@pytest.fixture(scope="module")
def small_bounds():
    return bound_states(SMALL_GRID, n_max=1)


def test_pure_bound_input_vanishes(small_bounds):
    ground = small_bounds.states[0].copy()
    pkt = pm.build_pmpe(ground, small_bounds)
    assert pkt.norm <= 1e-8
    assert pkt.stage_norms["after_subtraction"] <= 1e-16


def test_distant_positive_packet_passes(small_bounds):
    g = SMALL_GRID
    Z, R = np.meshgrid(g.z, g.rho, indexing="ij")
    # momentum width ~0.3, so essentially no amplitude sits at p_z <= 0
    vals = np.exp(-((Z - 12.0) ** 2) / 12 - R**2 / 2) * np.exp(1.2j * Z)
    wf = Wavefunction2D(g, vals, t=0.0).normalized()
    pkt = pm.build_pmpe(wf, small_bounds)
    fid = abs(pkt.psi.inner(wf)) / np.sqrt(pkt.norm * wf.norm2())
    assert fid >= 0.99
    assert pkt.norm >= 0.97


def test_idempotence_and_filter_contract(desk_pmpe, desk_bounds):
    pkt = desk_pmpe["pkt"]
    print("PMPE stage norms:", {k: round(v, 6)
                                for k, v in pkt.stage_norms.items()})
    assert 0.0 < pkt.norm < 1.0
    # overlap with every subtracted bound state
    worst = max(abs(b.inner(pkt.psi)) for b in desk_bounds.states)
    assert worst <= 1e-8
    # p_z <= 0 spectral residue at the end of the pulse
    assert pm.negative_pz_residue(pkt.psi) <= 1e-12
    # applying the construction twice is a no-op
    pkt2 = pm.build_pmpe(pkt.psi, desk_bounds)
    diff = pkt2.psi.values - pkt.psi.values
    change = np.sqrt(float(np.sum(np.abs(diff) ** 2
                                  * pkt.psi.weights[None, :])))
    assert change <= 1e-10


def test_grid_mismatch_rejected(small_bounds, desk_run):
    with pytest.raises(ValueError):
        pm.build_pmpe(desk_run["final"], small_bounds)


def test_backward_forward_round_trip(desk_pmpe):
    from attoscope import propagate

    pkt = desk_pmpe["pkt"]
    cfg = PropagatorConfig(dt=DESK_DT, absorber_on=False)
    t_end = PULSE.duration
    back = propagate(pkt.psi, PULSE, cfg, t_end, t_end - 30.0)
    forth = propagate(back, PULSE, cfg, t_end - 30.0, t_end)
    fid = abs(forth.inner(pkt.psi)) / np.sqrt(forth.norm2() * pkt.norm)
    assert fid >= 1.0 - 1e-6


def test_free_packet_backpropagation_control():
    g = SMALL_GRID
    Z, R = np.meshgrid(g.z, g.rho, indexing="ij")
    vals = np.exp(-(Z**2) / 4 - R**2 / 4) * np.exp(0.8j * Z)
    wf = Wavefunction2D(g, vals, t=40.0).normalized()
    cfg = PropagatorConfig(dt=0.02, absorber_on=False)
    from attoscope import propagate

    ts, zs, ps = [], [], []

    def sink(w):
        ts.append(w.t)
        zs.append(expectation_z(w))
        ps.append(expectation_pz(w))

    # free motion: no pulse and no Coulomb term would be ideal; over this
    # short window far from the core the Coulomb force is ~1e-3, so compare
    # velocity and momentum rather than straight-line positions
    propagate(wf, None, cfg, 40.0, 36.0,
              snapshot_times=np.arange(36.0, 40.001, 0.1), sink=sink)
    ts, zs, ps = map(np.array, (ts, zs, ps))
    order = np.argsort(ts)
    ts, zs, ps = ts[order], zs[order], ps[order]
    dz_dt = np.gradient(zs, ts)
    assert np.max(np.abs(dz_dt - ps)[1:-1]) < 1e-3 * np.max(np.abs(ps))


def test_pmpe_snapshots_and_wigner(desk_run, desk_pmpe):
    snaps = desk_pmpe["snaps"]
    assert set(snaps) == {158.0, 180.0}
    for t, wf in snaps.items():
        # delivery lands on the step closest to the requested instant
        assert wf.t == pytest.approx(t, abs=DESK_DT)
    w180, q180 = pm.pmpe_wigner(snaps[180.0])
    from attoscope.phase_space import reduce as reduce_density

    rho = reduce_density(snaps[180.0])
    # marginal identity on the PMPE Wigner function
    assert np.max(np.abs(moments(w180, 0) - rho.diagonal)) < 1e-6
    # momentum distribution integrates to the packet norm
    n_p = momentum_distribution(w180)
    total = float(np.sum(n_p) * w180.dp)
    assert total == pytest.approx(snaps[180.0].norm2(), abs=1e-6)

    # separatrix split at t = 158: both escape routes carry weight
    w158, _ = pm.pmpe_wigner(snaps[158.0])
    below, above = pm.separatrix_population_split(w158, 158.0, PULSE)
    print(f"PMPE separatrix split at 158: below {below:.3f} above {above:.3f}")
    assert below >= 0.05 and above >= 0.05

    # classical trajectory states ride the packet's high-weight region;
    # the contour maps are log-|W| colored and the stream weight decays
    # toward its head (and oscillates through interference fringes), so the
    # containment threshold (this artifact's choice) is |W| >= 1% of peak
    from attoscope import classical as cl

    w_peak = np.abs(w158.values).max()
    weights = {}
    for t_s in (149.0, 153.0, 157.0, 158.0):
        ic = cl.solve_initial_condition(t_s, desk_run["qset"].at(t_s), PULSE)
        traj = cl.propagate_trajectory(ic, PULSE, until=max(159.0, t_s + 0.5))
        k = int(np.argmin(np.abs(traj.t - 158.0)))
        weights[t_s] = abs(pm.wigner_value_at(w158, traj.z[k], traj.p[k])) \
            / w_peak
    print("|W| at classical states (fraction of max):", weights)
    for t_s, frac in weights.items():
        assert frac >= 0.01


def test_backprop_requires_past_times(desk_pmpe):
    pkt = desk_pmpe["pkt"]
    with pytest.raises(ValueError):
        pm.backpropagate_pmpe(pkt, PULSE, PropagatorConfig(dt=DESK_DT),
                              snapshot_times=[PULSE.duration + 5.0])
