"""attoscope: desk-scale simulator and analysis toolkit for strong-field
ionization of atomic hydrogen by a linearly polarized few-cycle pulse."""

from .model import (BarrierGeometry, GridSpec2D, PulseParams, barrier_geometry,
                    field_at, keldysh_gamma, potential)
from .tdse import (BoundStateSet, PropagatorConfig, Wavefunction2D,
                   bound_states, ground_state, propagate)

__all__ = [
    "BarrierGeometry", "GridSpec2D", "PulseParams", "barrier_geometry",
    "field_at", "keldysh_gamma", "potential",
    "BoundStateSet", "PropagatorConfig", "Wavefunction2D",
    "bound_states", "ground_state", "propagate",
]

__version__ = "0.1.0"
