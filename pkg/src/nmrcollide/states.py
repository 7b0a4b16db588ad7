"""System and environment states, plus qubit Bloch-vector conversions.

Global tensor order throughout the package is system ⊗ env1 ⊗ env2.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ComplexMatrix,
    as_matrix,
    hermitian_eigenvalues,
    is_hermitian,
    num_qubits_of,
)

STATE_TOL = 1e-10
BLOCH_TOL = 1e-9


class InvalidStateError(ValueError):
    """The matrix or vector does not describe a physical quantum state."""


def validate(m, tol: float = STATE_TOL) -> ComplexMatrix:
    """Check Hermiticity, unit trace and positivity; return ``m`` as an array."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"density matrix has trace {tr.real:.12g}, expected 1")
    lam_min = hermitian_eigenvalues(m)[-1]
    if lam_min < -tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lam_min:.3g}")
    return m


@dataclass(frozen=True)
class DensityMatrix:
    """A validated, read-only density matrix on ``num_qubits`` qubits."""

    matrix: ComplexMatrix
    num_qubits: int = field(init=False)

    def __post_init__(self):
        m = np.array(validate(self.matrix), dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "num_qubits", num_qubits_of(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class BlochVector:
    """Qubit state as ``r = (<sx>, <sy>, <sz>)`` with ``rho = (I + r.sigma) / 2``."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidStateError(f"Bloch component {name} is not finite")
            object.__setattr__(self, name, v)
        if self.norm() > 1.0 + BLOCH_TOL:
            raise InvalidStateError(f"Bloch vector length {self.norm():.12g} exceeds 1")

    @classmethod
    def from_array(cls, r) -> BlochVector:
        x, y, z = (float(c) for c in np.asarray(r, dtype=float))
        return cls(x, y, z)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


class EnvFlavor(str, enum.Enum):
    CLASSICAL = "classical"
    ENTANGLED = "entangled"


@dataclass(frozen=True)
class EnvSpec:
    """Two-qubit environment with correlation ``q`` (weight of equal-bit pairs)."""

    q: float
    flavor: EnvFlavor = EnvFlavor.CLASSICAL

    def __post_init__(self):
        check_q(self.q)
        object.__setattr__(self, "flavor", EnvFlavor(self.flavor))


def check_q(q: float) -> float:
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"correlation q must lie in [0, 1], got {q}")
    return float(q)


def pure_state(bits) -> DensityMatrix:
    """Projector onto the computational basis ket labelled by ``bits``.

    ``bits`` is a sequence of 0/1 (or a string like ``"01"``); the first entry
    is qubit 0.
    """
    labels = [int(b) for b in bits]
    if not labels or any(b not in (0, 1) for b in labels):
        raise ValueError(f"invalid ket label {bits!r}")
    index = int("".join(str(b) for b in labels), 2)
    dim = 2 ** len(labels)
    m = np.zeros((dim, dim), dtype=complex)
    m[index, index] = 1.0
    return DensityMatrix(m)


@functools.lru_cache(maxsize=256)
def env_state(spec: EnvSpec) -> DensityMatrix:
    q = spec.q
    if spec.flavor is EnvFlavor.CLASSICAL:
        return DensityMatrix(np.diag([q / 2, (1 - q) / 2, (1 - q) / 2, q / 2]).astype(complex))
    a = math.sqrt(q / 2)
    b = math.sqrt((1 - q) / 2)
    ket = np.array([a, b, b, a], dtype=complex)
    return DensityMatrix(np.outer(ket, ket.conj()))


def bloch_from_density(rho) -> BlochVector:
    m = np.asarray(rho, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"Bloch vectors need a single-qubit state, got shape {m.shape}")
    r = [np.trace(s @ m).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
    return BlochVector(*r)


def density_from_bloch(r: BlochVector) -> DensityMatrix:
    return DensityMatrix(0.5 * (I2 + r.x * SIGMA_X + r.y * SIGMA_Y + r.z * SIGMA_Z))
