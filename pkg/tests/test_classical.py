import numpy as np
import pytest

from attoscope import classical as cl
from attoscope.errors import NoBracketError, NoInflectionError
from attoscope.model import PulseParams, barrier_geometry
from attoscope.phase_space import QuantumMomentumCurve

PULSE = PulseParams()


def _synthetic_q(t_s, e_star, z_hi=60.0):
    zg = np.linspace(0.5, z_hi, 1200)
    q = cl.stationary_momentum(zg, t_s, e_star, PULSE)
    mask = np.isfinite(q)
    return QuantumMomentumCurve(z=zg, q=np.where(mask, q, 0.0), mask=mask,
                                floor=1e-8, t=t_s)


def test_stationary_curve_touches_barrier_top():
    geom = barrier_geometry(165.0, -0.5, PULSE)
    curve = cl.stationary_curve(165.0, geom.V_top, (0.5, 20.0), PULSE,
                                n_samples=4001)
    k = int(np.argmin(np.abs(curve.z - geom.z_top)))
    assert curve.allowed[k]
    assert curve.p[k] < 0.02
    assert geom.z_top == pytest.approx(1.0 / np.sqrt(0.06), abs=1e-12)


def test_stationary_curve_forbidden_gap():
    curve = cl.stationary_curve(165.0, -0.5, (0.5, 20.0), PULSE,
                                n_samples=2000)
    gap = (curve.z > 10.0 / 3.0 + 0.05) & (curve.z < 5.0 - 0.05)
    assert np.all(~curve.allowed[gap])
    outside = (curve.z < 10.0 / 3.0 - 0.05) | (curve.z > 5.0 + 0.05)
    assert np.all(curve.allowed[outside])


def test_stationary_curve_high_energy_tail():
    curve = cl.stationary_curve(165.0, 1.0, (30.0, 60.0), PULSE)
    dp = np.diff(curve.p) / np.diff(curve.z)
    assert np.all(curve.allowed)
    assert np.all(dp > 0)                  # field-dominated linear tail
    assert np.max(np.abs(dp)) < 0.05       # nearly constant slope


def test_inflection_root_against_independent_stencil():
    geom = barrier_geometry(165.0, -0.4, PULSE)
    z_i = cl.outermost_inflection(165.0, -0.4, (geom.z_top, 60.0), PULSE)
    # independent 5-point stencil, different width
    d2 = cl._d2p_stencil(z_i, 165.0, -0.4, PULSE, 0.003)
    assert abs(d2) < 1e-6


def test_inflection_continuity_in_energy():
    geom = barrier_geometry(157.0, -0.5, PULSE)
    es = np.linspace(geom.V_top + 1e-3, geom.V_top + 0.9, 120)
    zis = [cl.outermost_inflection(157.0, e, (geom.z_top, 60.0), PULSE)
           for e in es]
    jumps = np.abs(np.diff(zis))
    assert np.max(jumps) < 10 * 0.4        # no jumps above 10 grid spacings


def test_inflection_zero_field_contract():
    with pytest.raises(NoInflectionError):
        cl.outermost_inflection(-5.0, -0.4, (3.0, 30.0), PULSE)


def test_planted_solution_draws():
    rng = np.random.default_rng(7)
    t_s = 157.0
    geom = barrier_geometry(t_s, -0.5, PULSE)
    worst = 0.0
    for _ in range(100):
        e_star = geom.V_top + 1e-3 + 0.99 * float(rng.random())
        ic = cl.solve_initial_condition(t_s, _synthetic_q(t_s, e_star), PULSE)
        worst = max(worst, abs(ic.E_s - e_star))
        assert ic.residual <= 1e-6
        assert ic.E_s > geom.V_top
    print("worst planted-solution recovery error:", worst)
    assert worst <= 1e-6


def test_no_bracket_outside_escape_window(desk_run):
    with pytest.raises(NoBracketError) as err:
        cl.solve_initial_condition(141.0, desk_run["qset"].at(141.0), PULSE)
    assert err.value.scan is not None      # residual table is attached


def test_static_field_energy_conservation():
    ic = cl.InitialCondition(t_s=0.0, z_i=6.0, E_s=-0.2, p0=0.5, residual=0.0)
    traj = cl.propagate_trajectory(ic, PULSE, until=100.0,
                                   field=lambda t: -0.06)
    e_t = 0.5 * traj.p**2 - 1.0 / np.abs(traj.z) - 0.06 * traj.z
    assert np.max(np.abs(e_t - e_t[0])) < 1e-8


def test_energy_balance_against_field_work(desk_run):
    """Along a driven trajectory, dE/dt = z dE_z/dt; check by quadrature."""
    ic = cl.solve_initial_condition(157.0, desk_run["qset"].at(157.0), PULSE)
    traj = cl.propagate_trajectory(ic, PULSE, sample_dt=0.05)
    from attoscope.model import field_at

    e_t = 0.5 * traj.p**2 - 1.0 / np.abs(traj.z) \
        + field_at(PULSE, traj.t) * traj.z
    # d(E_z)/dt via centered differences on a fine axis
    dt = traj.t[1] - traj.t[0]
    dez = np.gradient(field_at(PULSE, traj.t), dt)
    rate = traj.z * dez
    work = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * dt)])
    drift = e_t - e_t[0] - work
    assert np.max(np.abs(drift)) < 1e-2 * max(np.max(np.abs(e_t - e_t[0])),
                                              1e-2)


def test_integrator_step_insensitivity(desk_run):
    ic = cl.solve_initial_condition(153.0, desk_run["qset"].at(153.0), PULSE)
    base = cl.propagate_trajectory(ic, PULSE)
    import attoscope.classical as mod

    # same tolerances, halved max step: p_f must be stable to 1e-8
    from scipy.integrate import solve_ivp as _keep  # noqa: F401

    traj2 = None
    orig = mod.solve_ivp

    def tighter(*args, **kw):
        kw["max_step"] = 0.5
        return orig(*args, **kw)

    mod.solve_ivp = tighter
    try:
        traj2 = cl.propagate_trajectory(ic, PULSE)
    finally:
        mod.solve_ivp = orig
    assert abs(base.p_f - traj2.p_f) < 1e-8


def test_desk_outcomes(desk_run):
    qset, pulse = desk_run["qset"], desk_run["pulse"]
    outcomes = {}
    for t_s in (149.0, 153.0, 157.0, 159.0):
        ic = cl.solve_initial_condition(t_s, qset.at(t_s), pulse)
        assert ic.residual <= 1e-6
        assert ic.E_s > barrier_geometry(t_s, -0.5, pulse).V_top
        traj = cl.propagate_trajectory(ic, pulse)
        outcomes[t_s] = traj
    for t_s in (149.0, 153.0, 157.0):
        assert outcomes[t_s].outcome == "direct-escape"
    assert abs(outcomes[159.0].p_f) < 0.05


def test_outcome_stability_under_threshold_perturbation(desk_run):
    """Classification of the quoted starting times is unchanged when the
    core radius and energy threshold wiggle by +/-10%."""
    qset, pulse = desk_run["qset"], desk_run["pulse"]
    for t_s in (149.0, 153.0, 157.0, 159.0):
        ic = cl.solve_initial_condition(t_s, qset.at(t_s), pulse)
        traj = cl.propagate_trajectory(ic, pulse)
        for radius in (1.8, 2.0, 2.2):
            outside = np.abs(traj.z) > radius
            reentered = bool(np.any(outside) and np.any(
                np.abs(traj.z[np.argmax(outside):]) < radius))
            for esc in (0.9, 1.0, 1.1):
                e_f = esc * traj.energy_f
                if reentered:
                    out = "rescatter"
                elif e_f < 0:
                    out = "recapture"
                elif traj.p_f * np.sign(traj.z_f) > 0:
                    out = "direct-escape"
                else:
                    out = "rescatter"
                assert out == traj.outcome


def test_ensemble_deviations(desk_run):
    entries = cl.ensemble([157.0], desk_run["qset"], desk_run["pulse"],
                          compare_times=[185.0, 210.0, 230.0])
    devs = entries[0].deviations
    print("trajectory-vs-flow deviations:", devs)
    assert set(devs) == {185.0, 210.0, 230.0}
    for v in devs.values():
        assert v is not None and v <= 0.1


def test_ensemble_empty():
    assert cl.ensemble([], None, PULSE) == []
