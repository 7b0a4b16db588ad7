import math

import numpy as np
import pytest

from nmrcollide.collision import map_lambda10
from nmrcollide.states import BlochVector, bloch_from_density, density_from_bloch, pure_state
from nmrcollide.witness import (
    Trajectory,
    Verdict,
    blp_verdict,
    bloch_trace_distance,
    closed_form_d1,
    closed_form_d2,
    small_eta_delta_d,
    trace_distance,
    two_step_trajectory,
)

# Remainder bound for |dD - (1-4q) eta^2| <= C eta^4 with eta <= 0.1.
# Brute-force scan over eta in [0.001, 0.1] x q in [0, 1] peaks at 12.576
# (eta = 0.1, q = 1); the series coefficient of eta^4 is 40q/3 - 5/6.
EXPANSION_C = 12.6


def random_bloch(rng):
    v = rng.normal(size=3)
    return BlochVector.from_array(v * rng.uniform() ** (1 / 3) / np.linalg.norm(v))


class TestTraceDistance:
    def test_same_state(self):
        rho = density_from_bloch(BlochVector(0.1, 0.2, 0.3)).matrix
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal(self):
        assert trace_distance(pure_state("0").matrix, pure_state("1").matrix) == 1.0

    def test_after_one_collision(self):
        a = map_lambda10(pure_state("0").matrix, 0.1).matrix
        b = map_lambda10(pure_state("1").matrix, 0.1).matrix
        assert trace_distance(a, b) == pytest.approx(0.9900834553211771, abs=1e-14)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            trace_distance(np.eye(2) / 2, np.eye(4) / 4)

    def test_three_qubit_states(self):
        a = pure_state("000").matrix
        b = np.eye(8) / 8
        assert trace_distance(a, b) == pytest.approx(7 / 8, abs=1e-14)


class TestBlochDistance:
    def test_poles(self):
        assert bloch_trace_distance(BlochVector(0, 0, 1), BlochVector(0, 0, -1)) == 1.0

    def test_same(self):
        r = BlochVector(0.3, -0.1, 0.2)
        assert bloch_trace_distance(r, r) == 0.0

    def test_matches_eigenvalue_route(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            r1, r2 = random_bloch(rng), random_bloch(rng)
            d = trace_distance(density_from_bloch(r1).matrix, density_from_bloch(r2).matrix)
            assert abs(bloch_trace_distance(r1, r2) - d) <= 1e-12


class TestClosedForms:
    def test_d1_values(self):
        assert closed_form_d1(0.0) == 1.0
        assert closed_form_d1(math.pi / 4) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
        assert closed_form_d1(0.1) == pytest.approx(0.9900834553211771, abs=1e-15)

    def test_d1_range(self):
        for eta in np.linspace(-4, 4, 401):
            assert math.sqrt(2) / 2 - 1e-15 <= closed_form_d1(eta) <= 1.0

    @pytest.mark.parametrize("q", [0.0, 0.3, 1.0])
    def test_d2_at_zero(self, q):
        assert closed_form_d2(0.0, q) == 1.0

    def test_d2_value(self):
        # At q = 0 the three terms reduce to 16(c^3 s)^2, (cos 4eta + 1)^2, 4 s^2 c^2 (cos 2eta + 1)^2.
        c, s = math.cos(0.1), math.sin(0.1)
        by_hand = 0.5 * math.sqrt(
            16 * (c**3 * s) ** 2 + (math.cos(0.4) + 1) ** 2 + 4 * s * s * c * c * (math.cos(0.2) + 1) ** 2
        )
        assert closed_form_d2(0.1, 0.0) == pytest.approx(by_hand, abs=1e-15)
        assert closed_form_d2(0.1, 0.0) == pytest.approx(0.9999960792762188, abs=1e-15)

    def test_d2_q_quarter_is_fourth_order(self):
        dd = closed_form_d2(0.1, 0.25) - closed_form_d1(0.1)
        assert abs(dd) <= EXPANSION_C * 0.1**4
        assert dd > 0

    def test_d2_rejects_q(self):
        with pytest.raises(ValueError):
            closed_form_d2(0.1, -0.2)

    def test_cross_validation_against_simulator(self):
        etas = np.linspace(0.01, 0.3, 5)
        qs = (0.0, 0.15, 0.25, 1.0)
        for eta in etas:
            for q in qs:
                traj = two_step_trajectory(float(eta), q)
                assert abs(traj.distances[1] - closed_form_d1(eta)) <= 1e-9
                assert abs(traj.distances[2] - closed_form_d2(eta, q)) <= 1e-9

    def test_small_eta(self):
        assert small_eta_delta_d(0.0, 0.3) == 0.0
        assert small_eta_delta_d(0.05, 0.0) == pytest.approx(0.0025, abs=1e-18)
        assert small_eta_delta_d(0.05, 0.5) == pytest.approx(-0.0025, abs=1e-18)

    def test_expansion_bound_scan(self):
        worst = 0.0
        for eta in np.linspace(0.001, 0.1, 100):
            for q in np.linspace(0, 1, 101):
                dd = closed_form_d2(eta, q) - closed_form_d1(eta)
                worst = max(worst, abs(dd - small_eta_delta_d(eta, q)) / eta**4)
        assert 12.5 < worst <= EXPANSION_C


class TestVerdict:
    def test_increase(self):
        assert blp_verdict([1, 0.99, 0.999]) is Verdict.NON_MARKOVIAN

    def test_decrease(self):
        assert blp_verdict([1, 0.99, 0.98]) is Verdict.NO_EVIDENCE

    def test_flat_is_no_evidence(self):
        assert blp_verdict([1, 1, 1]) is Verdict.NO_EVIDENCE

    def test_simulated_anticorrelated(self):
        assert blp_verdict(two_step_trajectory(0.05, 0.0)) is Verdict.NON_MARKOVIAN

    def test_simulated_correlated(self):
        assert blp_verdict(two_step_trajectory(0.05, 1.0)) is Verdict.NO_EVIDENCE

    def test_too_short(self):
        with pytest.raises(ValueError):
            blp_verdict([1, 0.9])


class TestTrajectory:
    def test_fields(self):
        traj = two_step_trajectory(0.05, 0.0)
        assert traj.times == (0, 1, 2)
        assert traj.distances[0] == 1.0
        assert traj.delta_d == pytest.approx(traj.distances[2] - traj.distances[1])
        assert all(0.0 <= d <= 1.0 for d in traj.distances)

    def test_delta_d_near_expansion(self):
        assert two_step_trajectory(0.05, 0.0).delta_d == pytest.approx(0.0025, abs=EXPANSION_C * 0.05**4)

    def test_single_step_has_no_delta(self):
        t = Trajectory(((pure_state("0"), pure_state("1")), (pure_state("0"), pure_state("1"))))
        assert t.delta_d is None

    def test_contraction_under_lambda10(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            a = density_from_bloch(random_bloch(rng)).matrix
            b = density_from_bloch(random_bloch(rng)).matrix
            eta = rng.uniform(-2, 2)
            before = trace_distance(a, b)
            after = trace_distance(map_lambda10(a, eta).matrix, map_lambda10(b, eta).matrix)
            assert after <= before + 1e-12

    def test_bloch_of_evolved_states(self):
        traj = two_step_trajectory(0.07, 0.15)
        for (a, b), d in zip(traj.states_pair, traj.distances):
            r1, r2 = bloch_from_density(a.matrix), bloch_from_density(b.matrix)
            assert bloch_trace_distance(r1, r2) == pytest.approx(d, abs=1e-12)
