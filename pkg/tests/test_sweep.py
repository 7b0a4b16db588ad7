from pathlib import Path

import numpy as np
import pytest

from nmrcollide.resolution import NoiseSpec, TomographyConfig
from nmrcollide.sweep import (
    CONFIG_KEYS,
    CSV_HEADER,
    ConfigError,
    SweepConfig,
    SweepResult,
    build_config,
    config_to_text,
    csv_text,
    emit_csv,
    emit_svg,
    parse_config_text,
    run_sweep,
    svg_text,
)

GOLDEN = Path(__file__).parent / "data" / "default_sweep.csv"


@pytest.fixture(scope="module")
def default_result():
    return run_sweep(SweepConfig())


class TestConfig:
    def test_defaults(self):
        cfg = SweepConfig()
        assert len(cfg.grid()) == 300
        assert cfg.etas()[0] == 0.001 and cfg.etas()[-1] == 0.1
        assert cfg.delta_r == 5e-4

    def test_grid_order(self):
        cfg = SweepConfig(eta_min=0.0, eta_max=0.1, eta_steps=3, q_values=(0.5, 0.0))
        assert cfg.grid() == [(0.0, 0.5), (0.05, 0.5), (0.1, 0.5), (0.0, 0.0), (0.05, 0.0), (0.1, 0.0)]

    @pytest.mark.parametrize(
        "kw",
        [
            {"eta_min": 0.2, "eta_max": 0.1},
            {"eta_steps": 0},
            {"q_values": (1.5,)},
            {"q_values": ()},
            {"mode": "quantum"},
            {"mode": "tomography"},
            {"eta_max": float("nan")},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            SweepConfig(**kw)

    def test_parse_text(self):
        text = "# sweep\neta_min = 0.01\neta_steps=5  # few\nq_values = 0, 0.25\nmode = circuit\n"
        cfg = build_config(parse_config_text(text))
        assert cfg.eta_min == 0.01 and cfg.eta_steps == 5
        assert cfg.q_values == (0.0, 0.25)
        assert cfg.mode.value == "circuit"

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("seed = 1\ncolour = red\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_config_text("seed 1\n")

    def test_bad_values(self):
        for values in ({"eta_steps": "many"}, {"perturb": "maybe"}, {"shots": "-3", "mode": "tomography"}):
            with pytest.raises(ConfigError):
                build_config(values)

    def test_round_trip(self):
        cfg = SweepConfig(
            eta_min=0.0,
            eta_max=0.05,
            eta_steps=7,
            q_values=(0.1, 0.9),
            mode="tomography",
            noise=NoiseSpec(1e-3, 4),
            tomography=TomographyConfig(5000, 4),
            output_path="out/x.csv",
            seed=4,
            threshold_rule="difference",
            perturb=True,
        )
        assert build_config(parse_config_text(config_to_text(cfg))) == cfg

    def test_every_key_documented(self):
        text = config_to_text(SweepConfig(mode="tomography", tomography=TomographyConfig(10)))
        keys = {line.split("=")[0].strip() for line in text.splitlines()}
        assert keys == set(CONFIG_KEYS)


class TestRows:
    def test_zero_eta_row(self):
        (row,) = run_sweep(SweepConfig(eta_min=0.0, eta_max=0.0, eta_steps=1, q_values=(0.3,))).rows
        assert row.d1 == 1.0 and row.d2 == 1.0
        assert row.delta_d == 0.0
        assert row.verdict == "Inconclusive"

    def test_anticorrelated_point(self):
        (row,) = run_sweep(SweepConfig(eta_min=0.05, eta_max=0.05, eta_steps=1, q_values=(0.0,))).rows
        assert row.delta_d == pytest.approx(0.0025, abs=1e-4)
        assert row.verdict == "Conclusive"

    def test_analytic_columns(self, default_result):
        for row in default_result.rows:
            assert abs(row.d1 - row.d1_analytic) <= 1e-10
            assert abs(row.d2 - row.d2_analytic) <= 1e-10

    def test_error_column(self, default_result):
        assert np.all(default_result.column("delta_d_error") == pytest.approx(3.5355339e-4))


class TestModes:
    def test_circuit_matches_map(self, default_result):
        circ = run_sweep(SweepConfig(mode="circuit"))
        for name in ("d1", "d2"):
            assert np.max(np.abs(circ.column(name) - default_result.column(name))) <= 1e-11

    def test_pulse_matches_map(self):
        cfg = dict(eta_steps=20, q_values=(0.0, 0.25))
        pulse = run_sweep(SweepConfig(mode="pulse", **cfg))
        ideal = run_sweep(SweepConfig(**cfg))
        for name in ("d1", "d2"):
            assert np.max(np.abs(pulse.column(name) - ideal.column(name))) <= 1e-6

    def test_tomography_converges(self, default_result):
        cfg = SweepConfig(mode="tomography", tomography=TomographyConfig(10**6), seed=3)
        tomo = run_sweep(cfg)
        ok = 0
        for t, ideal in zip(tomo.rows, default_result.rows):
            ok += abs(t.d1 - ideal.d1) <= 3 * t.d1_stderr and abs(t.d2 - ideal.d2) <= 3 * t.d2_stderr
        assert ok / len(tomo.rows) >= 0.95

    def test_tomography_seeded(self):
        cfg = SweepConfig(eta_steps=5, mode="tomography", tomography=TomographyConfig(1000), seed=8)
        assert csv_text(run_sweep(cfg)) == csv_text(run_sweep(cfg))
        other = SweepConfig(eta_steps=5, mode="tomography", tomography=TomographyConfig(1000), seed=9)
        assert csv_text(run_sweep(cfg)) != csv_text(run_sweep(other))

    def test_workers_do_not_change_output(self):
        cfg = SweepConfig(eta_steps=10, mode="tomography", tomography=TomographyConfig(500), seed=1)
        assert csv_text(run_sweep(cfg, workers=3)) == csv_text(run_sweep(cfg))


class TestOutputs:
    def test_header(self, default_result):
        text = csv_text(default_result)
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        assert len(text.splitlines()) == 301

    def test_golden_file(self, default_result):
        assert csv_text(default_result).encode() == GOLDEN.read_bytes()

    def test_empty_result(self):
        empty = SweepResult(SweepConfig(), ())
        with pytest.raises(ConfigError):
            csv_text(empty)
        with pytest.raises(ConfigError):
            svg_text(empty)

    def test_svg_series(self, default_result):
        svg = svg_text(default_result)
        assert svg.count('<polyline class="series"') == 3
        assert svg.count('class="floor"') == 1
        one = run_sweep(SweepConfig(eta_steps=4, q_values=(0.5,)))
        assert svg_text(one).count('<polyline class="series"') == 1

    def test_emit(self, tmp_path, default_result):
        csv_path = emit_csv(default_result, tmp_path / "a.csv")
        assert csv_path.read_bytes() == GOLDEN.read_bytes()
        svg_path = emit_svg(default_result, tmp_path / "a.svg")
        assert svg_path.read_text().startswith("<svg")

    def test_unwritable(self, tmp_path, default_result):
        with pytest.raises(OSError, match="missing"):
            emit_csv(default_result, tmp_path / "missing" / "a.csv")
