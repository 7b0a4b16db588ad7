"""Parameter sweeps over (eta, q) and their CSV / SVG renderings."""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .collision import map_lambda10, map_lambda20
from .nmrsim import PulseExperiment, SpinSystem
from .resolution import (
    DEFAULT_DELTA_R,
    NoiseSpec,
    ThresholdRule,
    TomographyConfig,
    classify,
    distance_stderr,
    make_rng,
    perturb_bloch,
    propagate_error,
    simulate_tomography,
)
from .states import check_q, pure_state
from .witness import closed_form_d1, closed_form_d2, trace_distance, two_step_trajectory

CSV_HEADER = ("eta", "q", "d1", "d2", "delta_d", "delta_d_analytic", "delta_d_error", "verdict")
DEFAULT_Q_VALUES = (0.0, 0.15, 0.25)


class ConfigError(ValueError):
    """Invalid sweep configuration (usage error)."""


class Mode(str, enum.Enum):
    MAP = "map"
    CIRCUIT = "circuit"
    PULSE = "pulse"
    TOMOGRAPHY = "tomography"


@dataclass(frozen=True)
class SweepConfig:
    eta_min: float = 0.001
    eta_max: float = 0.1
    eta_steps: int = 100
    q_values: tuple[float, ...] = DEFAULT_Q_VALUES
    mode: Mode = Mode.MAP
    noise: NoiseSpec | None = field(default_factory=NoiseSpec)
    tomography: TomographyConfig | None = None
    output_path: str = "sweep.csv"
    seed: int = 0
    threshold_rule: ThresholdRule = ThresholdRule.SINGLE
    perturb: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
            object.__setattr__(self, "threshold_rule", ThresholdRule(self.threshold_rule))
            object.__setattr__(self, "q_values", tuple(check_q(float(q)) for q in self.q_values))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not (math.isfinite(self.eta_min) and math.isfinite(self.eta_max)):
            raise ConfigError("eta bounds must be finite")
        if self.eta_min > self.eta_max:
            raise ConfigError(f"eta_min {self.eta_min} exceeds eta_max {self.eta_max}")
        if int(self.eta_steps) != self.eta_steps or self.eta_steps < 1:
            raise ConfigError(f"eta_steps must be a positive integer, got {self.eta_steps}")
        if not self.q_values:
            raise ConfigError("q_values must not be empty")
        if self.mode is Mode.TOMOGRAPHY and self.tomography is None:
            raise ConfigError("tomography mode needs a shot count")

    @property
    def delta_r(self) -> float:
        return self.noise.delta_r if self.noise is not None else 0.0

    def etas(self) -> np.ndarray:
        return np.linspace(self.eta_min, self.eta_max, int(self.eta_steps))

    def grid(self) -> list[tuple[float, float]]:
        """Grid points in output order: q outer, eta inner."""
        return [(float(eta), q) for q in self.q_values for eta in self.etas()]


@dataclass(frozen=True)
class SweepRow:
    eta: float
    q: float
    d1: float
    d2: float
    d1_analytic: float
    d2_analytic: float
    delta_d_error: float
    verdict: str
    d1_stderr: float = 0.0
    d2_stderr: float = 0.0

    @property
    def delta_d(self) -> float:
        return self.d2 - self.d1

    @property
    def delta_d_analytic(self) -> float:
        return self.d2_analytic - self.d1_analytic

    def csv_fields(self) -> list[str]:
        values = (self.eta, self.q, self.d1, self.d2, self.delta_d, self.delta_d_analytic,
                  self.delta_d_error)
        return [repr(float(v)) for v in values] + [self.verdict]


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple[SweepRow, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def for_q(self, q: float) -> list[SweepRow]:
        return [r for r in self.rows if r.q == q]


def _ideal_distances(eta: float, q: float, mode: Mode) -> tuple[float, float, list]:
    rho1, rho2 = pure_state("0").matrix, pure_state("1").matrix
    if mode is Mode.MAP:
        s1 = [map_lambda10(rho1, eta), map_lambda20(rho1, eta, eta, q)]
        s2 = [map_lambda10(rho2, eta), map_lambda20(rho2, eta, eta, q)]
        pairs = list(zip(s1, s2))
    elif mode is Mode.PULSE:
        pairs = list(PulseExperiment(eta, q, SpinSystem.default()).run().states_pair[1:])
    else:
        pairs = list(two_step_trajectory(eta, q).states_pair[1:])
    d1, d2 = (trace_distance(a.matrix, b.matrix) for a, b in pairs)
    return d1, d2, pairs


def _measured_distance(pair, cfg: SweepConfig, index: int, step: int) -> tuple[float, float]:
    estimates = []
    for k, state in enumerate(pair):
        rng = make_rng(cfg.seed, index, step, k)
        tomo = simulate_tomography(state.matrix, cfg.tomography, rng=rng)
        r = tomo.r
        if cfg.perturb and cfg.noise is not None:
            shifted = perturb_bloch(tomo.bloch(), cfg.noise, rng=rng)
            r = shifted.array
        estimates.append((r, tomo.stderr))
    (r1, s1), (r2, s2) = estimates
    return 0.5 * float(np.linalg.norm(r1 - r2)), distance_stderr(r1, s1, r2, s2)


def evaluate_point(cfg: SweepConfig, index: int, eta: float, q: float) -> SweepRow:
    """Compute one grid row; ``index`` keys the random streams of this point."""
    d1, d2, pairs = _ideal_distances(eta, q, cfg.mode)
    s1 = s2 = 0.0
    if cfg.mode is Mode.TOMOGRAPHY:
        d1, s1 = _measured_distance(pairs[0], cfg, index, 1)
        d2, s2 = _measured_distance(pairs[1], cfg, index, 2)
    delta_r = cfg.delta_r
    verdict = classify(d2 - d1, delta_r, cfg.threshold_rule).value
    return SweepRow(
        eta=eta,
        q=q,
        d1=d1,
        d2=d2,
        d1_analytic=closed_form_d1(eta),
        d2_analytic=closed_form_d2(eta, q),
        delta_d_error=propagate_error(delta_r),
        verdict=verdict,
        d1_stderr=s1,
        d2_stderr=s2,
    )


def _evaluate_star(args) -> SweepRow:
    return evaluate_point(*args)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Evaluate every grid point; row order never depends on ``workers``."""
    tasks = [(cfg, i, eta, q) for i, (eta, q) in enumerate(cfg.grid())]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_star, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_evaluate_star(t) for t in tasks]
    return SweepResult(cfg, tuple(rows))


def csv_text(result: SweepResult) -> str:
    if not result.rows:
        raise ConfigError("cannot emit an empty sweep result")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_csv(result: SweepResult, path=None) -> Path:
    return _write(path or result.config.output_path, csv_text(result))


_SERIES_STYLE = (
    ("#1f77b4", ""),
    ("#ff7f0e", ' stroke-dasharray="6 3"'),
    ("#2ca02c", ' stroke-dasharray="6 3 2 3"'),
    ("#d62728", ' stroke-dasharray="2 2"'),
)


def svg_text(result: SweepResult, width: int = 640, height: int = 420) -> str:
    """Delta-D versus eta, one polyline per q, plus the resolution floor."""
    if not result.rows:
        raise ConfigError("cannot plot an empty sweep result")
    left, right, top, bottom = 70, 20, 20, 50
    etas = result.column("eta")
    dds = result.column("delta_d")
    floor = result.rows[0].delta_d_error
    x0, x1 = float(etas.min()), float(etas.max())
    y0 = min(float(dds.min()), 0.0, -floor)
    y1 = max(float(dds.max()), floor)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def py(y):
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<g class="axes" stroke="black" stroke-width="1">'
        f'<line x1="{left}" y1="{py(0.0):.3f}" x2="{width - right}" y2="{py(0.0):.3f}"/>'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}"/></g>',
        f'<text x="{(width + left) / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="14">eta</text>',
        f'<text x="16" y="{(height - bottom) / 2:.1f}" font-size="14">dD</text>',
        f'<text x="{left}" y="{height - bottom + 16}" font-size="11" text-anchor="middle">'
        f"{x0:.4g}</text>",
        f'<text x="{width - right}" y="{height - bottom + 16}" font-size="11" '
        f'text-anchor="end">{x1:.4g}</text>',
        f'<line class="floor" x1="{left}" y1="{py(floor):.3f}" x2="{width - right}" '
        f'y2="{py(floor):.3f}" stroke="gray" stroke-dasharray="4 4"/>',
    ]
    for k, q in enumerate(result.config.q_values):
        color, dash = _SERIES_STYLE[k % len(_SERIES_STYLE)]
        pts = " ".join(f"{px(r.eta):.3f},{py(r.delta_d):.3f}" for r in result.for_q(q))
        out.append(
            f'<polyline class="series" data-q="{q!r}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash} points="{pts}"/>'
        )
        out.append(
            f'<text x="{width - right - 80}" y="{top + 16 * (k + 1)}" font-size="12" '
            f'fill="{color}">q = {q:g}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(result: SweepResult, path=None) -> Path:
    if path is None:
        path = Path(result.config.output_path).with_suffix(".svg")
    return _write(path, svg_text(result))


# Flat config-file keys, one per SweepConfig field (nested specs flattened).
CONFIG_KEYS = (
    "eta_min",
    "eta_max",
    "eta_steps",
    "q_values",
    "mode",
    "delta_r",
    "shots",
    "seed",
    "output_path",
    "threshold_rule",
    "perturb",
)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def build_config(values: dict[str, str]) -> SweepConfig:
    """Turn flat string settings into a :class:`SweepConfig`."""
    try:
        kw = {}
        if "eta_min" in values:
            kw["eta_min"] = float(values["eta_min"])
        if "eta_max" in values:
            kw["eta_max"] = float(values["eta_max"])
        if "eta_steps" in values:
            kw["eta_steps"] = int(values["eta_steps"])
        if "q_values" in values:
            kw["q_values"] = tuple(float(v) for v in values["q_values"].split(",") if v.strip())
        if "mode" in values:
            kw["mode"] = values["mode"]
        if "seed" in values:
            kw["seed"] = int(values["seed"])
        if "output_path" in values:
            kw["output_path"] = values["output_path"]
        if "threshold_rule" in values:
            kw["threshold_rule"] = values["threshold_rule"]
        if "perturb" in values:
            kw["perturb"] = _parse_bool(values["perturb"])
        seed = kw.get("seed", 0)
        delta_r = float(values.get("delta_r", DEFAULT_DELTA_R))
        kw["noise"] = NoiseSpec(delta_r, seed)
        if "shots" in values:
            kw["tomography"] = TomographyConfig(int(values["shots"]), seed)
        cfg = SweepConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def config_to_text(cfg: SweepConfig) -> str:
    lines = [
        f"eta_min = {cfg.eta_min!r}",
        f"eta_max = {cfg.eta_max!r}",
        f"eta_steps = {cfg.eta_steps}",
        "q_values = " + ",".join(repr(q) for q in cfg.q_values),
        f"mode = {cfg.mode.value}",
        f"delta_r = {cfg.delta_r!r}",
    ]
    if cfg.tomography is not None:
        lines.append(f"shots = {cfg.tomography.shots}")
    lines += [
        f"seed = {cfg.seed}",
        f"output_path = {cfg.output_path}",
        f"threshold_rule = {cfg.threshold_rule.value}",
        f"perturb = {str(cfg.perturb).lower()}",
    ]
    return "\n".join(lines) + "\n"

