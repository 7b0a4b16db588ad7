"""Collisional-model simulation of a qubit in a correlated NMR spin environment."""

from .collision import (
    CollisionConfig,
    conditional_unitary,
    evolve_sequence,
    map_lambda10,
    map_lambda20,
)
from .states import (
    BlochVector,
    DensityMatrix,
    EnvFlavor,
    EnvSpec,
    InvalidStateError,
    bloch_from_density,
    density_from_bloch,
    env_state,
    pure_state,
)
from .witness import (
    Trajectory,
    Verdict,
    blp_verdict,
    bloch_trace_distance,
    closed_form_d1,
    closed_form_d2,
    simulate_trajectory,
    small_eta_delta_d,
    trace_distance,
    two_step_trajectory,
)

__all__ = [
    "BlochVector",
    "CollisionConfig",
    "DensityMatrix",
    "EnvFlavor",
    "EnvSpec",
    "InvalidStateError",
    "Trajectory",
    "Verdict",
    "bloch_from_density",
    "bloch_trace_distance",
    "blp_verdict",
    "closed_form_d1",
    "closed_form_d2",
    "conditional_unitary",
    "density_from_bloch",
    "env_state",
    "evolve_sequence",
    "map_lambda10",
    "map_lambda20",
    "pure_state",
    "simulate_trajectory",
    "small_eta_delta_d",
    "trace_distance",
    "two_step_trajectory",
]
