"""Collisional dynamics of a qubit against a correlated two-qubit environment.

Two independent routes produce the reduced system state:

* ``evolve_sequence`` builds ``rho ⊗ rho_env``, applies the global collision
  unitaries one after the other and traces out the environment.
* ``map_lambda10`` / ``map_lambda20`` apply the equivalent Kraus sums directly
  on the 2x2 system state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    ComplexMatrix,
    dagger,
    kron,
    partial_trace,
    pauli_rotation,
)
from .states import DensityMatrix, EnvSpec, check_q, env_state

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)

SYSTEM = 0
N_ENV = 2


@dataclass(frozen=True)
class CollisionConfig:
    """Collision strengths ``etas`` (one per collision) and the environment."""

    etas: tuple[float, ...]
    env: EnvSpec

    def __post_init__(self):
        etas = tuple(float(e) for e in self.etas)
        if not etas:
            raise ValueError("at least one collision strength is required")
        if not all(math.isfinite(e) for e in etas):
            raise ValueError(f"collision strengths must be finite, got {etas}")
        object.__setattr__(self, "etas", etas)


def conditional_unitary(eta: float) -> ComplexMatrix:
    """``exp(i eta sx) ⊗ |0><0| + exp(i eta sy) ⊗ |1><1|`` on (system, env qubit)."""
    return kron(pauli_rotation("x", eta), P0) + kron(pauli_rotation("y", eta), P1)


def embed_operator(op: ComplexMatrix, targets: tuple[int, ...], num_qubits: int) -> ComplexMatrix:
    """Lift ``op`` acting on ``targets`` (in that order) to ``num_qubits`` qubits.

    Uses an axis permutation of ``op ⊗ I`` rather than swap gates.
    """
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not act on {k} qubits")
    if len(set(targets)) != k or min(targets) < 0 or max(targets) >= num_qubits:
        raise ValueError(f"invalid target qubits {targets} for {num_qubits} qubits")
    rest = [q for q in range(num_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    # Axis i of the tensor currently belongs to qubit order[i].
    order = list(targets) + rest
    perm = [order.index(q) for q in range(num_qubits)]
    t = full.reshape([2] * (2 * num_qubits))
    t = t.transpose(perm + [p + num_qubits for p in perm])
    d = 2**num_qubits
    return t.reshape(d, d)


def collision_operator(eta: float, env_qubit: int, num_env: int = N_ENV) -> ComplexMatrix:
    """Global unitary for a collision of the system with environment qubit ``env_qubit``.

    ``env_qubit`` counts from 1, matching the global index of that qubit.
    """
    return embed_operator(conditional_unitary(eta), (SYSTEM, env_qubit), 1 + num_env)


def evolve_global(rho0, cfg: CollisionConfig) -> list[ComplexMatrix]:
    """Global 3-qubit states after each collision; the state is never re-factorized."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2, 2):
        raise ValueError(f"system state must be 2x2, got shape {rho0.shape}")
    if len(cfg.etas) > N_ENV:
        raise ValueError(
            f"{len(cfg.etas)} collisions requested but the environment has {N_ENV} qubits"
        )
    state = kron(rho0, env_state(cfg.env).matrix)
    out = []
    for k, eta in enumerate(cfg.etas, start=1):
        u = collision_operator(eta, k)
        state = u @ state @ dagger(u)
        out.append(state)
    return out


def reduce_to_system(global_state: ComplexMatrix) -> DensityMatrix:
    return DensityMatrix(partial_trace(global_state, 1 + N_ENV, {SYSTEM}))


def evolve_sequence(rho0, cfg: CollisionConfig) -> list[DensityMatrix]:
    """Reduced system state after each collision in ``cfg``."""
    return [reduce_to_system(s) for s in evolve_global(rho0, cfg)]


def _conj(u: ComplexMatrix, rho: ComplexMatrix) -> ComplexMatrix:
    return u @ rho @ dagger(u)


def map_lambda10(rho, eta: float) -> DensityMatrix:
    """Single collision as an equal-weight mixture of x and y rotations."""
    rho = np.asarray(rho, dtype=complex)
    rx = pauli_rotation("x", eta)
    ry = pauli_rotation("y", eta)
    return DensityMatrix(0.5 * (_conj(rx, rho) + _conj(ry, rho)))


def map_lambda20(rho, eta1: float, eta2: float, q: float) -> DensityMatrix:
    """Two collisions; same-axis branches weigh ``q/2``, mixed branches ``(1-q)/2``."""
    check_q(q)
    rho = np.asarray(rho, dtype=complex)
    x1, y1 = pauli_rotation("x", eta1), pauli_rotation("y", eta1)
    x2, y2 = pauli_rotation("x", eta2), pauli_rotation("y", eta2)
    same = _conj(x2 @ x1, rho) + _conj(y2 @ y1, rho)
    mixed = _conj(y2 @ x1, rho) + _conj(x2 @ y1, rho)
    return DensityMatrix(0.5 * q * same + 0.5 * (1 - q) * mixed)

