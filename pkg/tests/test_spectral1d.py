import numpy as np
import pytest

from attoscope import spectral1d as sp
from attoscope.model import PulseParams, barrier_geometry


def test_softening_calibration(companion):
    model = companion["model"]
    assert abs(model.a - np.sqrt(2.0)) < 0.05      # seed-guess neighborhood
    _, e0 = sp.ground_state_1d(model)
    assert abs(e0 + 0.5) < 1e-4


def test_zero_field_stationary(companion):
    model = companion["model"]
    psi0, _ = sp.ground_state_1d(model)
    quiet = PulseParams(F=1e-30)
    still = sp.SoftCore1DModel(a=model.a, z=model.z, pulse=quiet)
    prop = sp.Propagator1D(still, dt=0.04, absorber_on=False)
    psi = psi0.copy()
    for k in range(500):
        psi = prop.step(psi, k * 0.04, 0.04)
    ov = abs(np.sum(np.conj(psi0) * psi) * model.dz)
    ov /= np.sqrt(sp.norm2_1d(model, psi0) * sp.norm2_1d(model, psi))
    assert ov >= 1.0 - 1e-8


def test_norm_conservation_1d(companion):
    model = companion["model"]
    psi0, _ = sp.ground_state_1d(model)
    prop = sp.Propagator1D(model, dt=0.04, absorber_on=False)
    psi = psi0.copy()
    for k in range(1000):
        psi = prop.step(psi, 140.0 + k * 0.04, 0.04)
    assert abs(sp.norm2_1d(model, psi) - sp.norm2_1d(model, psi0)) <= 1e-8


def test_completeness_and_mean_energy(companion):
    model = companion["model"]
    psi = companion["snaps"][160.0]
    spec = sp.instantaneous_spectrum(model, 160.0)
    dist = sp.energy_distribution(spec, psi, model.dz)
    norm = sp.norm2_1d(model, psi)
    assert dist.integral() == pytest.approx(norm, abs=1e-6)
    h_psi = sp.apply_h_1d(model, psi, 160.0)
    direct = float(np.real(np.sum(np.conj(psi) * h_psi) * model.dz)) / norm
    assert dist.mean == pytest.approx(direct, abs=1e-6)


def test_field_free_distribution_is_ground_peak(companion):
    model = companion["model"]
    psi0, e0 = sp.ground_state_1d(model)
    d, e = sp._kinetic_diagonals(len(model.z), model.dz)
    from scipy.linalg import eigh_tridiagonal

    vals, vecs = eigh_tridiagonal(d + model.potential(-1.0), e)
    spec = sp.InstantSpectrum(t=-1.0, energies=vals, vectors=vecs,
                              v_top=0.0, v_top_reference=0.0,
                              above=vals >= 0.0)
    dist = sp.energy_distribution(spec, psi0, model.dz)
    assert dist.mean == pytest.approx(e0, abs=1e-8)
    assert np.max(dist.populations) > 0.999


def test_reference_barrier_value(companion):
    spec = sp.instantaneous_spectrum(companion["model"], 165.0)
    assert spec.v_top_reference == pytest.approx(-2.0 * np.sqrt(0.06),
                                                 abs=1e-9)
    # the model's own barrier sits above the bare-Coulomb one (softening)
    assert spec.v_top > spec.v_top_reference


def test_mean_energy_below_barrier(companion):
    for t in (155.0, 160.0, 165.0):
        spec = sp.instantaneous_spectrum(companion["model"], t)
        dist = sp.energy_distribution(spec, companion["snaps"][t],
                                      companion["model"].dz)
        assert dist.mean < dist.v_top


def test_spread_nondecreasing(companion):
    spreads = []
    for t in companion["times"]:
        spec = sp.instantaneous_spectrum(companion["model"], t)
        dist = sp.energy_distribution(spec, companion["snaps"][t],
                                      companion["model"].dz)
        spreads.append(dist.spread)
    assert all(b >= a - 1e-12 for a, b in zip(spreads, spreads[1:]))


def test_packet_split_identities(companion):
    model = companion["model"]
    psi = companion["snaps"][165.0]
    spec = sp.instantaneous_spectrum(model, 165.0)
    ft, ob, st = sp.decompose_packets(spec, psi, model.dz)
    assert np.max(np.abs(ft + ob - psi)) <= 1e-10
    cross = abs(np.sum(np.conj(ft) * ob) * model.dz)
    assert cross <= 1e-10
    assert sp.norm2_1d(model, st) <= sp.norm2_1d(model, ft)
    # projector algebra: reapplying the split leaves the FT packet alone
    ft2, ob2, _ = sp.decompose_packets(spec, ft, model.dz)
    assert np.max(np.abs(ft2 - ft)) <= 1e-10
    assert np.max(np.abs(ob2)) <= 1e-10


def test_current_bilinearity(companion):
    model = companion["model"]
    psi = companion["snaps"][165.0]
    spec = sp.instantaneous_spectrum(model, 165.0)
    ft, ob, st = sp.decompose_packets(spec, psi, model.dz)
    j_ft, j_ob, j_st, j = sp.packet_currents(ft, ob, st, psi, model.dz)
    j_cross = sp.cross_current_1d(ft, ob, model.dz)
    assert np.max(np.abs(j - (j_ft + j_ob + j_cross))) <= 1e-8
    # a real packet carries no current
    assert np.max(np.abs(sp.current_1d(np.abs(psi).astype(complex),
                                       model.dz))) == 0.0


def test_sharp_tunneling_current_is_small(companion):
    model = companion["model"]
    psi = companion["snaps"][165.0]
    spec = sp.instantaneous_spectrum(model, 165.0)
    dist = sp.energy_distribution(spec, psi, model.dz)
    ft, ob, st = sp.decompose_packets(spec, psi, model.dz)
    j_ft, j_ob, j_st, _ = sp.packet_currents(ft, ob, st, psi, model.dz)
    geom = barrier_geometry(165.0, dist.mean, model.pulse)
    z_hi = (geom.z_exit if geom.z_exit is not None else 2 * geom.z_top) + 5.0
    win = (model.z >= geom.z_top - 1.0) & (model.z <= z_hi)
    ratio = np.max(np.abs(j_st[win])) / np.max(np.abs(j_ft[win]))
    print(f"|j_ST|/|j_FT| near the exit at the peak: {ratio:.2e} "
          f"(|ST|^2 = {sp.norm2_1d(model, st):.3e})")
    assert ratio <= 1e-2


def test_split_tracks_barrier_top(companion):
    model = companion["model"]
    for t in (155.0, 165.0):
        spec = sp.instantaneous_spectrum(model, t)
        below = spec.energies[~spec.above]
        above = spec.energies[spec.above]
        assert below.max() < spec.v_top <= above.min()


def test_empty_window_warns(companion):
    model = companion["model"]
    psi = companion["snaps"][165.0]
    spec = sp.instantaneous_spectrum(model, 165.0)
    with pytest.warns(UserWarning, match="sharp-tunneling"):
        sp.decompose_packets(spec, psi, model.dz, st_width=1e-9)


def test_calibration_failure_contract():
    z = np.linspace(-50.0, 50.0, 501)
    from attoscope.errors import ConvergenceError

    with pytest.raises(ConvergenceError):
        sp.calibrate_softening(z, bracket=(3.0, 4.0))
