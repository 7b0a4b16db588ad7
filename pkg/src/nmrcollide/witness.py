"""Trace-distance witness of non-Markovianity and its analytic references."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .collision import CollisionConfig, evolve_sequence
from .linalg import hermitian_eigenvalues
from .states import BlochVector, DensityMatrix, EnvSpec, check_q, pure_state


class Verdict(str, enum.Enum):
    NON_MARKOVIAN = "NonMarkovian"
    NO_EVIDENCE = "NoEvidence"


def trace_distance(a, b) -> float:
    """``0.5 * Tr|a - b|`` from the eigenvalues of the Hermitian difference."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"state dimensions differ: {a.shape} vs {b.shape}")
    return 0.5 * float(np.sum(np.abs(hermitian_eigenvalues(a - b))))


def bloch_trace_distance(r1: BlochVector, r2: BlochVector) -> float:
    return 0.5 * float(np.linalg.norm(r1.array - r2.array))


def closed_form_d1(eta: float) -> float:
    """Distance between the |0> and |1> trajectories after one collision."""
    return 0.5 * math.sqrt(3.0 + math.cos(4.0 * eta))


def closed_form_d2(eta: float, q: float) -> float:
    """Distance between the |0> and |1> trajectories after two equal collisions."""
    check_q(q)
    c, s = math.cos(eta), math.sin(eta)
    t1 = 16.0 * (c * s * (c * c - q * s * s)) ** 2
    t2 = ((q + 1.0) * math.cos(4.0 * eta) - q + 1.0) ** 2
    t3 = 4.0 * s * s * c * c * ((q + 1.0) * math.cos(2.0 * eta) - q + 1.0) ** 2
    return 0.5 * math.sqrt(t1 + t2 + t3)


def small_eta_delta_d(eta: float, q: float) -> float:
    """Leading-order change in distance between the two collisions, ``(1-4q) eta^2``."""
    return (1.0 - 4.0 * q) * eta * eta


@dataclass(frozen=True)
class Trajectory:
    """Paired reduced-state histories, step 0 being the initial pair."""

    states_pair: tuple[tuple[DensityMatrix, DensityMatrix], ...]
    distances: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        pairs = tuple((a, b) for a, b in self.states_pair)
        if not pairs:
            raise ValueError("a trajectory needs at least the initial pair")
        object.__setattr__(self, "states_pair", pairs)
        object.__setattr__(
            self, "distances", tuple(trace_distance(a.matrix, b.matrix) for a, b in pairs)
        )

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(range(len(self.states_pair)))

    @property
    def delta_d(self) -> float | None:
        if len(self.distances) < 3:
            return None
        return self.distances[2] - self.distances[1]


def simulate_trajectory(
    cfg: CollisionConfig,
    rho1=None,
    rho2=None,
) -> Trajectory:
    """Run both initial states (default ``|0><0|`` and ``|1><1|``) through ``cfg``."""
    rho1 = pure_state("0") if rho1 is None else rho1
    rho2 = pure_state("1") if rho2 is None else rho2
    rho1 = rho1 if isinstance(rho1, DensityMatrix) else DensityMatrix(rho1)
    rho2 = rho2 if isinstance(rho2, DensityMatrix) else DensityMatrix(rho2)
    s1 = evolve_sequence(rho1.matrix, cfg)
    s2 = evolve_sequence(rho2.matrix, cfg)
    return Trajectory(((rho1, rho2), *zip(s1, s2)))


def two_step_trajectory(eta: float, q: float, flavor="classical") -> Trajectory:
    return simulate_trajectory(CollisionConfig((eta, eta), EnvSpec(q, flavor)))


def blp_verdict(traj) -> Verdict:
    """Flag non-Markovianity when any recorded distance strictly grows.

    ``traj`` is a :class:`Trajectory` or a plain sequence of distances that
    starts at step 0. A non-increasing sequence is never declared Markovian.
    """
    distances = traj.distances if isinstance(traj, Trajectory) else tuple(traj)
    if len(distances) < 3:
        raise ValueError("need at least two recorded steps after step 0")
    increases = any(b > a for a, b in zip(distances, distances[1:]))
    return Verdict.NON_MARKOVIAN if increases else Verdict.NO_EVIDENCE
