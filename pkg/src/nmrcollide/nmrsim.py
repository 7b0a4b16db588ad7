"""Pulse-level NMR back-end for the three-spin collision experiment.

Units: offsets and couplings in Hz, times in seconds, angles in radians,
hbar = 1. The drift Hamiltonian in the rotating frame is

    H = sum_n 2 pi nu_n I_z^n + sum_{k<m} 2 pi J_km I_z^k I_z^m

which is diagonal in the computational basis, with ``I = sigma / 2``. Pulses
are ideal: instantaneous and perfectly selective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .collision import CollisionConfig, conditional_unitary, embed_operator, reduce_to_system
from .linalg import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, ComplexMatrix, dagger, kron
from .states import DensityMatrix, EnvFlavor, EnvSpec, check_q, env_state, pure_state
from .witness import Trajectory

TAU_COLLISION_1 = 0.00358
TAU_COLLISION_2 = 0.00525
DEFAULT_OFFSETS_HZ = (0.0, 10000.0, -10000.0)
DEFAULT_J_ENV_HZ = 30.0


class CompilationError(ValueError):
    """A pulse program cannot be built for the requested operation."""


@dataclass(frozen=True)
class SpinSystem:
    offsets: tuple[float, ...]
    couplings: np.ndarray

    def __post_init__(self):
        offsets = tuple(float(v) for v in self.offsets)
        j = np.array(self.couplings, dtype=float)
        n = len(offsets)
        if j.shape != (n, n):
            raise ValueError(f"coupling matrix shape {j.shape} does not match {n} spins")
        if not np.allclose(j, j.T, atol=0.0) or np.any(np.diag(j) != 0.0):
            raise ValueError("couplings must be symmetric with a zero diagonal")
        if not all(math.isfinite(v) for v in offsets) or not np.all(np.isfinite(j)):
            raise ValueError("offsets and couplings must be finite")
        j.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "couplings", j)

    @property
    def n_spins(self) -> int:
        return len(self.offsets)

    @property
    def dim(self) -> int:
        return 2**self.n_spins

    @classmethod
    def default(cls) -> SpinSystem:
        """System spin 0 with environment spins 1 and 2.

        System-environment couplings follow from ``tau = 1 / (4 J)`` with the
        two collision times; offsets and the env-env coupling are placeholders.
        """
        j01 = 1.0 / (4.0 * TAU_COLLISION_1)
        j02 = 1.0 / (4.0 * TAU_COLLISION_2)
        j12 = DEFAULT_J_ENV_HZ
        couplings = np.array([[0.0, j01, j02], [j01, 0.0, j12], [j02, j12, 0.0]])
        return cls(DEFAULT_OFFSETS_HZ, couplings)


_AXIS_PHASE = {"x": 0.0, "y": math.pi / 2}


@dataclass(frozen=True)
class PulseOp:
    """One step of a pulse program.

    ``rotation`` applies ``exp(-i angle (I_x cos phi + I_y sin phi))`` to
    ``target``, where ``phi`` is the axis phase plus ``phase``; a leading
    ``-`` on the axis negates the angle. ``z`` rotations ignore ``phase``.
    """

    kind: str
    target: int | None = None
    axis: str = "x"
    angle: float = 0.0
    phase: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in ("rotation", "free_evolution", "gradient"):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind == "rotation":
            if self.target is None or self.target < 0:
                raise ValueError("rotation needs a non-negative target spin")
            if self.axis.lstrip("-") not in ("x", "y", "z") or self.axis.count("-") > 1:
                raise ValueError(f"invalid rotation axis {self.axis!r}")
        if self.kind == "free_evolution" and not self.duration >= 0:
            raise ValueError(f"free evolution needs a non-negative duration, got {self.duration}")

    @classmethod
    def rot(cls, target: int, axis: str, angle: float, phase: float = 0.0) -> PulseOp:
        return cls("rotation", target=target, axis=axis, angle=float(angle), phase=float(phase))

    @classmethod
    def free(cls, tau: float) -> PulseOp:
        return cls("free_evolution", duration=float(tau))

    @classmethod
    def grad(cls) -> PulseOp:
        return cls("gradient")


@dataclass(frozen=True)
class PulseProgram:
    ops: tuple[PulseOp, ...]
    label: str = ""

    def __post_init__(self):
        ops = tuple(self.ops)
        if not ops:
            raise ValueError("a pulse program needs at least one operation")
        object.__setattr__(self, "ops", ops)

    @property
    def duration(self) -> float:
        return sum(op.duration for op in self.ops if op.kind == "free_evolution")

    def __add__(self, other: PulseProgram) -> PulseProgram:
        label = " + ".join(s for s in (self.label, other.label) if s)
        return PulseProgram(self.ops + other.ops, label)


def diagonal_energies(sys: SpinSystem) -> np.ndarray:
    """Drift Hamiltonian eigenvalues in rad/s, indexed by computational basis state."""
    n = sys.n_spins
    bits = (np.arange(sys.dim)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    iz = 0.5 * (1 - 2 * bits)
    energy = 2 * math.pi * iz @ np.asarray(sys.offsets)
    j_upper = np.triu(sys.couplings, k=1)
    energy += 2 * math.pi * np.einsum("bk,km,bm->b", iz, j_upper, iz)
    return energy


def free_propagator(sys: SpinSystem, tau: float) -> ComplexMatrix:
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    return np.diag(np.exp(-1j * diagonal_energies(sys) * tau))


def single_spin_rotation(axis: str, angle: float, phase: float = 0.0) -> ComplexMatrix:
    sign = -1.0 if axis.startswith("-") else 1.0
    base = axis.lstrip("-")
    theta = sign * angle
    if base == "z":
        gen = SIGMA_Z
    else:
        phi = _AXIS_PHASE[base] + phase
        gen = math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * gen


def rotation_propagator(sys: SpinSystem, op: PulseOp) -> ComplexMatrix:
    if op.kind != "rotation":
        raise ValueError(f"expected a rotation, got {op.kind}")
    if op.target >= sys.n_spins:
        raise ValueError(f"target spin {op.target} out of range for {sys.n_spins} spins")
    u = single_spin_rotation(op.axis, op.angle, op.phase)
    return embed_operator(u, (op.target,), sys.n_spins)


def gradient_dephase(rho) -> DensityMatrix:
    """Drop every coherence in the z basis, keeping the populations."""
    m = np.asarray(rho, dtype=complex)
    return DensityMatrix(np.diag(np.diag(m)))


def op_propagator(sys: SpinSystem, op: PulseOp) -> ComplexMatrix:
    if op.kind == "rotation":
        return rotation_propagator(sys, op)
    if op.kind == "free_evolution":
        return free_propagator(sys, op.duration)
    raise ValueError("a gradient is not unitary and has no propagator")


def program_propagator(sys: SpinSystem, prog: PulseProgram) -> ComplexMatrix:
    """Net unitary of a gradient-free program (later ops multiply on the left)."""
    u = np.eye(sys.dim, dtype=complex)
    for op in prog.ops:
        u = op_propagator(sys, op) @ u
    return u


def run_program(rho0, sys: SpinSystem, prog: PulseProgram) -> DensityMatrix:
    rho = np.array(rho0, dtype=complex)
    if rho.shape != (sys.dim, sys.dim):
        raise ValueError(f"state shape {rho.shape} does not match {sys.n_spins} spins")
    for op in prog.ops:
        if op.kind == "gradient":
            rho = np.diag(np.diag(rho))
        else:
            u = op_propagator(sys, op)
            rho = u @ rho @ dagger(u)
    return DensityMatrix(rho)


def operator_distance(a: ComplexMatrix, b: ComplexMatrix) -> float:
    """Frobenius distance between ``a`` and ``b`` minimised over a global phase."""
    overlap = np.trace(dagger(b) @ a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def refocused_coupling(pair: tuple[int, int], idle: int, tau: float) -> list[PulseOp]:
    """Free evolution that keeps only the ``pair`` z-z coupling for time ``tau``.

    pi pulses on the idle spin at tau/4 and 3tau/4 and on both pair spins at
    tau/2 and tau cancel every offset and every coupling to the idle spin.
    """
    a, b = pair
    quarter = PulseOp.free(tau / 4)
    flip = [PulseOp.rot(a, "x", math.pi), PulseOp.rot(b, "x", math.pi)]
    flip_idle = PulseOp.rot(idle, "x", math.pi)
    return [quarter, flip_idle, quarter, *flip, quarter, flip_idle, quarter, *flip]


def _coupling(sys: SpinSystem, a: int, b: int) -> float:
    j = float(sys.couplings[a, b])
    if j == 0.0:
        raise CompilationError(f"spins {a} and {b} are not coupled")
    return j


def compile_collision(eta: float, which: int, sys: SpinSystem) -> PulseProgram:
    """Pulse program for the collision of the system (spin 0) with env spin ``which``.

    The conditional unitary is a controlled phase gate ``diag(1, i)`` on the
    system, controlled by the environment spin, wrapped around an x rotation
    by ``-2 eta``. Each controlled phase gate is a z-z evolution of
    ``tau = 1 / (4 J)`` plus local z rotations; its inverse flips the sign of
    the coupling with pi pulses on the environment spin.
    """
    if not math.isfinite(eta):
        raise CompilationError(f"eta must be finite, got {eta}")
    if sys.n_spins != 3 or which not in (1, 2):
        raise CompilationError("collisions are compiled for spins (0, 1) or (0, 2) of three")
    s, e = 0, which
    idle = 3 - which
    tau = 1.0 / (4.0 * abs(_coupling(sys, s, e)))
    zz = refocused_coupling((s, e), idle, tau)
    # A negative coupling reverses the sign of the accumulated z-z phase.
    flip_e = [PulseOp.rot(e, "x", math.pi)]
    inverse_zz, forward_zz = (zz, flip_e + zz + flip_e)
    if sys.couplings[s, e] < 0:
        inverse_zz, forward_zz = forward_zz, inverse_zz
    ops = [
        PulseOp.rot(s, "z", -math.pi / 4),
        PulseOp.rot(e, "z", -math.pi / 4),
        *inverse_zz,
        PulseOp.rot(s, "x", -2.0 * eta),
        *forward_zz,
        PulseOp.rot(s, "z", math.pi / 4),
        PulseOp.rot(e, "z", math.pi / 4),
    ]
    return PulseProgram(tuple(ops), label=f"collision {which} eta={eta!r}")


def collision_target(eta: float, which: int) -> ComplexMatrix:
    """Ideal 8x8 collision unitary the compiled program must reproduce."""
    return embed_operator(conditional_unitary(eta), (0, which), 3)


def _prep_program(tau2: float, q_high: bool, sys: SpinSystem) -> PulseProgram:
    ops = [
        PulseOp.rot(1, "y", math.pi / 2),
        PulseOp.rot(2, "y", math.pi / 2),
        *refocused_coupling((1, 2), 0, tau2),
        PulseOp.rot(2, "x" if q_high else "-x", math.pi / 2),
        PulseOp.grad(),
    ]
    return PulseProgram(tuple(ops), label=f"prepare tau2={tau2!r}")


def _env_same_parity(rho: DensityMatrix) -> float:
    pops = np.real(np.diag(rho.matrix)).reshape(2, 4)
    return float(pops[:, 0].sum() + pops[:, 3].sum())


def compile_preparation(q: float, sys: SpinSystem) -> PulseProgram:
    """Gradient-based program taking ``rho0 ⊗ |00><00|`` to ``rho0 ⊗ rho_env(q)``.

    Both environment spins are tipped to the equator, evolve under their
    mutual coupling for ``tau2``, and a final pulse on spin 2 converts the
    conditional phase into correlated populations. The gradient removes the
    coherences. ``tau2`` is found by root finding on the simulated
    equal-parity population, which must equal ``q``.
    """
    q = check_q(q)
    j = abs(_coupling(sys, 1, 2))
    q_high = q >= 0.5
    start = kron(pure_state("0").matrix, pure_state("00").matrix)

    def mismatch(tau2: float) -> float:
        return _env_same_parity(run_program(start, sys, _prep_program(tau2, q_high, sys))) - q

    lo, hi = 0.0, 1.0 / (2.0 * j)
    if abs(mismatch(lo)) < 1e-13:
        tau2 = lo
    elif abs(mismatch(hi)) < 1e-13:
        tau2 = hi
    else:
        tau2 = brentq(mismatch, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return _prep_program(tau2, q_high, sys)


def preparation_tau(prog: PulseProgram) -> float:
    return prog.duration


@dataclass(frozen=True)
class PulseExperiment:
    """Two-run pulse-level experiment for one ``(eta, q)`` point."""

    eta: float
    q: float
    sys: SpinSystem = field(default_factory=SpinSystem.default)
    flavor: EnvFlavor = EnvFlavor.CLASSICAL
    prepare_with_gradient: bool = False

    def programs(self) -> tuple[PulseProgram, PulseProgram]:
        return (
            compile_collision(self.eta, 1, self.sys),
            compile_collision(self.eta, 2, self.sys),
        )

    def initial_global(self, rho0: DensityMatrix) -> np.ndarray:
        if self.prepare_with_gradient:
            if EnvFlavor(self.flavor) is not EnvFlavor.CLASSICAL:
                raise ValueError("gradient preparation only yields the classical environment")
            prep = compile_preparation(self.q, self.sys)
            start = kron(rho0.matrix, pure_state("00").matrix)
            return run_program(start, self.sys, prep).matrix
        return kron(rho0.matrix, env_state(EnvSpec(self.q, self.flavor)).matrix)

    def run(self, rho1=None, rho2=None) -> Trajectory:
        rho1 = pure_state("0") if rho1 is None else rho1
        rho2 = pure_state("1") if rho2 is None else rho2
        u1, u2 = (program_propagator(self.sys, p) for p in self.programs())
        pairs = [(rho1, rho2)]
        after1, after2 = [], []
        for rho0 in (rho1, rho2):
            g = self.initial_global(rho0)
            g = u1 @ g @ dagger(u1)
            after1.append(reduce_to_system(g))
            g = u2 @ g @ dagger(u2)
            after2.append(reduce_to_system(g))
        pairs.append(tuple(after1))
        pairs.append(tuple(after2))
        return Trajectory(tuple(pairs))

    def total_duration(self) -> float:
        return sum(p.duration for p in self.programs())


def program_to_text(prog: PulseProgram) -> str:
    """Line format: ``ROT <spin> <axis> <angle> <phase>``, ``FREE <tau>``, ``GRAD``."""
    lines = []
    for op in prog.ops:
        if op.kind == "rotation":
            lines.append(f"ROT {op.target} {op.axis} {op.angle!r} {op.phase!r}")
        elif op.kind == "free_evolution":
            lines.append(f"FREE {op.duration!r}")
        else:
            lines.append("GRAD")
    return "\n".join(lines) + "\n"


def program_from_text(text: str, label: str = "") -> PulseProgram:
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "ROT" and len(parts) == 5:
                ops.append(PulseOp.rot(int(parts[1]), parts[2], float(parts[3]), float(parts[4])))
            elif parts[0] == "FREE" and len(parts) == 2:
                ops.append(PulseOp.free(float(parts[1])))
            elif parts[0] == "GRAD" and len(parts) == 1:
                ops.append(PulseOp.grad())
            else:
                raise ValueError(f"unrecognised instruction {line!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return PulseProgram(tuple(ops), label)


def pulse_trajectory(cfg: CollisionConfig, sys: SpinSystem | None = None) -> Trajectory:
    """Pulse-level counterpart of ``witness.simulate_trajectory`` for equal etas."""
    etas = cfg.etas
    if len(etas) != 2 or etas[0] != etas[1]:
        raise ValueError("the pulse experiment runs two collisions of equal strength")
    exp = PulseExperiment(etas[0], cfg.env.q, sys or SpinSystem.default(), cfg.env.flavor)
    return exp.run()
