"""Finite measurement resolution: Bloch-vector errors, shot noise, detectability.

Random draws use numpy's PCG64 bit generator seeded through ``SeedSequence``.
Independent streams for parallel tasks are keyed by ``(seed, task_index)``,
so results do not depend on scheduling order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .states import BlochVector, bloch_from_density

DEFAULT_DELTA_R = 5e-4


class Detectability(str, enum.Enum):
    CONCLUSIVE = "Conclusive"
    INCONCLUSIVE = "Inconclusive"


class ThresholdRule(str, enum.Enum):
    """How a Bloch-vector error becomes the conclusiveness threshold.

    ``SINGLE`` uses the error of one distance, ``delta_r / sqrt(2)``.
    ``DIFFERENCE`` combines the errors of two independent distances,
    ``sqrt(2) * delta_r / sqrt(2) = delta_r``.
    """

    SINGLE = "single"
    DIFFERENCE = "difference"


@dataclass(frozen=True)
class NoiseSpec:
    delta_r: float = DEFAULT_DELTA_R
    seed: int = 0

    def __post_init__(self):
        if not self.delta_r >= 0:
            raise ValueError(f"delta_r must be non-negative, got {self.delta_r}")


@dataclass(frozen=True)
class TomographyConfig:
    shots: int
    seed: int = 0

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots < 1:
            raise ValueError(f"shots must be a positive integer, got {self.shots}")


@dataclass(frozen=True)
class TomographyResult:
    """Raw Bloch estimate and per-axis standard errors.

    The estimate is not projected into the unit ball, so it may sit slightly
    outside it for near-pure states. Use :meth:`bloch` for a valid vector.
    """

    r: np.ndarray
    stderr: np.ndarray

    def bloch(self) -> BlochVector:
        n = float(np.linalg.norm(self.r))
        return BlochVector.from_array(self.r / n if n > 1.0 else self.r)


def make_rng(seed: int, *task: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, task)])))


def propagate_error(delta_r: float) -> float:
    """Trace-distance error implied by an isotropic Bloch-vector error."""
    if delta_r < 0:
        raise ValueError(f"delta_r must be non-negative, got {delta_r}")
    return delta_r / math.sqrt(2.0)


def threshold(delta_r: float, rule: ThresholdRule | str = ThresholdRule.SINGLE) -> float:
    rule = ThresholdRule(rule)
    d = propagate_error(delta_r)
    return d if rule is ThresholdRule.SINGLE else math.sqrt(2.0) * d


def classify(
    delta_d_measured: float,
    delta_r: float,
    rule: ThresholdRule | str = ThresholdRule.SINGLE,
) -> Detectability:
    if delta_d_measured > threshold(delta_r, rule):
        return Detectability.CONCLUSIVE
    return Detectability.INCONCLUSIVE


def random_unit_vectors(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    shape = (3,) if size is None else (size, 3)
    v = rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def perturb_bloch(
    r: BlochVector,
    spec: NoiseSpec,
    rng: np.random.Generator | None = None,
) -> BlochVector:
    """Shift ``r`` by ``delta_r`` in a uniformly random direction.

    Without ``rng`` a fresh stream is drawn from ``spec.seed``. Results that
    leave the Bloch ball are rescaled back onto its surface.
    """
    if spec.delta_r == 0:
        return r
    rng = make_rng(spec.seed) if rng is None else rng
    out = r.array + spec.delta_r * random_unit_vectors(rng)
    n = float(np.linalg.norm(out))
    if n > 1.0:
        out = out / n
    return BlochVector.from_array(out)


def simulate_tomography(
    rho,
    cfg: TomographyConfig,
    rng: np.random.Generator | None = None,
) -> TomographyResult:
    """Estimate each Pauli expectation from ``cfg.shots`` two-outcome measurements."""
    r_true = bloch_from_density(rho).array
    rng = make_rng(cfg.seed) if rng is None else rng
    p = np.clip((1.0 + r_true) / 2.0, 0.0, 1.0)
    n = int(cfg.shots)
    p_hat = rng.binomial(n, p) / n
    return TomographyResult(2.0 * p_hat - 1.0, 2.0 * np.sqrt(p_hat * (1.0 - p_hat) / n))


def distance_stderr(r1: np.ndarray, s1: np.ndarray, r2: np.ndarray, s2: np.ndarray) -> float:
    """First-order error of ``|r1 - r2| / 2`` given independent per-axis errors."""
    diff = np.asarray(r1) - np.asarray(r2)
    n = float(np.linalg.norm(diff))
    if n == 0.0:
        return 0.5 * float(np.sqrt(np.sum(np.square(s1) + np.square(s2))))
    grad = diff / n
    return 0.5 * float(np.sqrt(np.sum(grad**2 * (np.square(s1) + np.square(s2)))))


def resolution_boundary(etas, delta_d_values, delta_r: float, rule=ThresholdRule.SINGLE):
    """First ``eta`` (in grid order) whose change in distance is classified Conclusive."""
    for eta, dd in zip(etas, delta_d_values):
        if classify(dd, delta_r, rule) is Detectability.CONCLUSIVE:
            return float(eta)
    return None
