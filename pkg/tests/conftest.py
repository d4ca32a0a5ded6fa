"""Shared fixtures. The expensive quantum runs are session-scoped and shared
across test modules; everything derived from them is deterministic."""
import time
import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

from attoscope import (GridSpec2D, PropagatorConfig, PulseParams,
                       bound_states, ground_state, propagate)
from attoscope.phase_space import (QSnapshotSet, flow_momentum_from_density,
                                   reduce)

# boxes small enough for quick unit tests, big enough for the 1s orbital
SMALL_GRID = GridSpec2D(z_min=-20.0, z_max=20.0, dz=0.2, rho_max=10.0,
                        drho=0.2)
# desk-scale production analogue used for the acceptance suite
DESK_GRID = GridSpec2D(z_min=-120.0, z_max=120.0, dz=0.3, rho_max=60.0,
                       drho=0.3)
DESK_DT = 0.03125  # divides every 1-a.u. snapshot instant exactly

KEEP_PSI_TIMES = (155.0, 158.0, 160.0, 165.0)


@pytest.fixture(scope="session")
def small_ground():
    wf, e0 = ground_state(SMALL_GRID)
    return wf, e0


@pytest.fixture(scope="session")
def desk_run():
    """Ground state + full-pulse propagation on the desk grid, with flow
    momentum snapshots and a handful of retained states."""
    pulse = PulseParams()
    cfg = PropagatorConfig(dt=DESK_DT)
    t0 = time.time()
    wf0, e0 = ground_state(DESK_GRID, cfg)
    gs_seconds = time.time() - t0
    q_times = [float(t) for t in range(140, 201)] \
        + [float(t) for t in range(205, 236, 5)]
    curves, kept = {}, {}

    def sink(wf):
        t = round(wf.t, 6)
        curves[t] = flow_momentum_from_density(reduce(wf))
        if t in KEEP_PSI_TIMES:
            kept[t] = wf

    t0 = time.time()
    wf_final = propagate(wf0, pulse, cfg, 0.0, pulse.duration,
                         snapshot_times=q_times, sink=sink)
    run_seconds = time.time() - t0
    times = sorted(curves)
    qset = QSnapshotSet(times=np.array(times),
                        curves=[curves[t] for t in times])
    return {
        "pulse": pulse, "cfg": cfg, "grid": DESK_GRID,
        "wf0": wf0, "e0": e0, "final": wf_final, "qset": qset,
        "psis": kept, "gs_seconds": gs_seconds, "run_seconds": run_seconds,
    }


@pytest.fixture(scope="session")
def desk_bounds(desk_run):
    return bound_states(DESK_GRID, desk_run["cfg"], n_max=4)


@pytest.fixture(scope="session")
def desk_pmpe(desk_run, desk_bounds):
    """PMPE packet from the desk run, backpropagated to the two analysis
    instants."""
    from attoscope import pmpe as pm

    pkt = pm.build_pmpe(desk_run["final"], desk_bounds)
    snaps = pm.backpropagate_pmpe(pkt, desk_run["pulse"], desk_run["cfg"],
                                  snapshot_times=[158.0, 180.0])
    return {"pkt": pkt, "snaps": snaps}


@pytest.fixture(scope="session")
def companion():
    """Calibrated 1D companion model on the wide analysis box, with the
    pulse-driven snapshots used by the spectral tests."""
    from attoscope import spectral1d as sp

    model = sp.make_model(PulseParams(), z_max=400.0, dz=0.2)
    times = [float(t) for t in range(150, 166)]
    _, snaps = sp.run_1d_companion(model, dt=0.04, snapshot_times=times)
    return {"model": model, "snaps": snaps, "times": times}


@pytest.fixture(scope="session")
def desk_table(desk_run):
    """Table-I round trip on the desk q snapshots."""
    from attoscope import reconstruct as rc

    rows = rc.table1_experiment([149.0, 151.0, 153.0, 154.0, 155.0, 156.0,
                                 157.0], desk_run["qset"], desk_run["pulse"])
    return rows


def acceptance_line(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status}" + (f"  ({detail})" if detail else ""))
    return ok
