"""Small dense complex linear algebra for 1-3 qubit operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Qubit 0 is the
leftmost tensor factor, i.e. the most significant bit of a row index.
"""

from __future__ import annotations

import numpy as np

ComplexMatrix = np.ndarray

MAX_DIM = 8
HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


class DimensionOverflowError(ValueError):
    """Raised when an operation would produce a matrix larger than MAX_DIM."""


class ContractViolation(ValueError):
    """Raised when an input breaks a documented precondition."""


def as_matrix(m) -> ComplexMatrix:
    """Coerce ``m`` to a square complex matrix with a power-of-two dimension."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n < 1 or n & (n - 1):
        raise ValueError(f"dimension {n} is not a power of two")
    return a


def num_qubits_of(m: ComplexMatrix) -> int:
    return int(m.shape[0]).bit_length() - 1


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(m).T


def kron(a, b, max_dim: int = MAX_DIM) -> ComplexMatrix:
    """Tensor product ``a ⊗ b``, refusing results larger than ``max_dim``."""
    a = as_matrix(a)
    b = as_matrix(b)
    dim = a.shape[0] * b.shape[0]
    if dim > max_dim:
        raise DimensionOverflowError(f"kron result dim {dim} exceeds {max_dim}")
    return np.kron(a, b)


def kron_all(*factors, max_dim: int = MAX_DIM) -> ComplexMatrix:
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = kron(out, f, max_dim=max_dim)
    return out


def pauli_rotation(axis: str, eta: float) -> ComplexMatrix:
    """Return ``exp(+i eta sigma_axis) = cos(eta) I + i sin(eta) sigma_axis``."""
    if not np.isfinite(eta):
        raise ValueError(f"eta must be finite, got {eta}")
    try:
        sigma = PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None
    return np.cos(eta) * I2 + 1j * np.sin(eta) * sigma


def is_hermitian(m: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def is_unitary(m: ComplexMatrix, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(dagger(m) @ m - np.eye(m.shape[0]))) <= tol)


def partial_trace(m, num_qubits: int, keep) -> ComplexMatrix:
    """Trace out every qubit not listed in ``keep``.

    The kept qubits stay in ascending order in the result.
    """
    m = as_matrix(m)
    if m.shape[0] != 2**num_qubits:
        raise ValueError(f"matrix dim {m.shape[0]} does not match {num_qubits} qubits")
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if keep[0] < 0 or keep[-1] >= num_qubits:
        raise ValueError(f"qubit indices {keep} out of range for {num_qubits} qubits")
    traced = [k for k in range(num_qubits) if k not in keep]
    t = m.reshape([2] * (2 * num_qubits))
    # Contract highest axes first so lower axis numbers stay valid.
    for k in reversed(traced):
        n_left = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + n_left)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def _eigh_2x2(m: ComplexMatrix) -> tuple[np.ndarray, ComplexMatrix]:
    a = m[0, 0].real
    d = m[1, 1].real
    b = m[0, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    rad = np.hypot(half, abs(b))
    vals = np.array([mean + rad, mean - rad])
    if rad == 0.0:
        return vals, np.eye(2, dtype=complex)
    # Eigenvectors from the rotation that diagonalizes [[a, b], [b*, d]].
    theta = 0.5 * np.arctan2(abs(b), half)
    phase = np.exp(-1j * np.angle(b)) if b != 0 else 1.0
    c, s = np.cos(theta), np.sin(theta)
    vecs = np.array([[c, -s], [s * phase, c * phase]], dtype=complex)
    return vals, vecs


def _jacobi_eigh(m: ComplexMatrix) -> tuple[np.ndarray, ComplexMatrix]:
    """Cyclic complex Jacobi iteration on a Hermitian matrix."""
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a[off_mask])
        if off < JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                # Phase the (p, q) element real, then apply a real Givens rotation.
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                g = np.eye(n, dtype=complex)
                g[p, p] = c
                g[p, q] = s
                g[q, p] = -s * np.conj(phase)
                g[q, q] = c * np.conj(phase)
                a = dagger(g) @ a @ g
                a[p, q] = a[q, p] = 0.0
                v = v @ g
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    vals = np.real(np.diag(a))
    return vals, v


def hermitian_eigh(m) -> tuple[np.ndarray, ComplexMatrix]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(values, vectors)`` with eigenvectors as columns.
    """
    m = as_matrix(m)
    if not is_hermitian(m):
        raise ContractViolation("matrix is not Hermitian within 1e-10")
    m = 0.5 * (m + dagger(m))
    if m.shape[0] == 1:
        return np.real(np.diag(m)).copy(), np.eye(1, dtype=complex)
    if m.shape[0] == 2:
        vals, vecs = _eigh_2x2(m)
    else:
        vals, vecs = _jacobi_eigh(m)
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


def hermitian_eigenvalues(m) -> np.ndarray:
    return hermitian_eigh(m)[0]
