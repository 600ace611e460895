import math

import numpy as np
import pytest

import tunnelclock as tc
from tunnelclock.errors import ValidationError
from tunnelclock.experiments import regime_label


class TestScenarioConfig:
    def test_defaults_match_reference_setup(self):
        cfg = tc.ScenarioConfig(v=1.0)
        assert (cfg.q, cfg.w, cfg.u, cfg.x0) == (2.0, 1.0, 2.0, -15.0)
        assert (cfg.x_min, cfg.x_max, cfg.n) == (-60.0, 60.0, 4096)
        assert (cfg.dt, cfg.sample_every, cfg.t_final_cap) == (1e-3, 10, 200.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"v": -1.0},
            {"v": 1.0, "q": -1.0},
            {"v": 1.0, "w": 0.0},
            {"v": 1.0, "u": -0.5},
            {"v": 1.0, "x0": -4.0},
            {"v": 1.0, "n": 1000},
            {"v": 1.0, "dt": 0.0},
            {"v": 1.0, "sample_every": 0},
            {"v": 1.0, "t_final_cap": -5.0},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValidationError):
            tc.ScenarioConfig(**kwargs)


class TestRunScenario:
    def test_v2_collision(self, v2_run):
        result, _ = v2_run
        e0 = tc.analytic_energy(2.0, 2.0).E0
        # regime II: below the semiclassical prediction, near the linear law
        assert result.dt_tunnel < tc.semiclassical_time(1.0, 2.0, e0)
        assert 0.4 < result.dt_tunnel < 0.55
        assert 0.0 <= result.transmission <= 1.0

    def test_probability_partition(self, v2_run):
        result, _ = v2_run
        d = result.diagnostics
        total = d["prob_left"] + d["prob_inside"] + d["prob_right"]
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_wraparound_guard(self, v2_run):
        result, _ = v2_run
        assert result.diagnostics["max_edge_probability"] < 1e-6

    def test_cap_exceeded_for_slow_packet(self):
        cfg = tc.ScenarioConfig(v=0.05, t_final_cap=30.0)
        with pytest.raises(tc.CollisionIncompleteError, match="cap"):
            tc.run_scenario(cfg)

    def test_sampling_refinement_invariance(self, v2_run):
        result, _ = v2_run
        finer = tc.run_scenario(tc.ScenarioConfig(v=2.0, sample_every=5))
        assert abs(finer.dt_tunnel - result.dt_tunnel) < 2e-3


def test_regime_labels():
    assert regime_label(-0.1, 2.0) == "I"
    assert regime_label(0.0, 2.0) == "II"  # edge rows resolve downward
    assert regime_label(1.0, 2.0) == "II"
    assert regime_label(2.0, 2.0) == "II"
    assert regime_label(2.1, 2.0) == "III"


class TestVelocitySweep:
    def test_single_element(self):
        table = tc.velocity_sweep(2.0, 1.0, 2.0, [2.0])
        assert len(table.rows) == 1
        row = table.rows[0]
        assert row.status == "ok"
        assert row.regime == "II"
        assert row.E0 == pytest.approx(11.0 / 6.0)
        assert row.t_classical == pytest.approx(0.5)

    def test_failed_row_is_gap_not_abort(self):
        table = tc.velocity_sweep(2.0, 1.0, 2.0, [0.05, 2.0], t_final_cap=30.0)
        assert table.rows[0].status != "ok"
        assert table.rows[0].dt_tunnel is None
        assert table.rows[1].status == "ok"

    def test_rejects_unsorted(self):
        with pytest.raises(ValidationError):
            tc.velocity_sweep(2.0, 1.0, 2.0, [2.0, 1.0])

    def test_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            tc.velocity_sweep(2.0, 1.0, 2.0, [-1.0, 2.0])


class TestFitLogLaw:
    def test_exact_recovery(self):
        vs = [0.15, 0.25, 0.35, 0.45, 0.55]
        pts = [(v, 0.66 * math.log10(v) + 0.55) for v in vs]
        fit = tc.fit_log_law(pts)
        assert fit.coefficients[0] == pytest.approx(0.66, abs=1e-6)
        assert fit.coefficients[1] == pytest.approx(0.55, abs=1e-6)
        assert fit.residual_rms < 1e-9
        assert fit.point_count == 5

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            tc.fit_log_law([(0.2, 0.1), (0.3, 0.2), (0.4, 0.3)])

    def test_out_of_regime(self):
        with pytest.raises(ValidationError):
            tc.fit_log_law([(0.2, 0.1), (0.3, 0.2), (0.4, 0.3), (1.0, 0.4)])


class TestFitLinearLaw:
    def test_exact_recovery(self):
        vs = [0.7, 1.0, 1.3, 1.6, 1.9]
        pts = [(v, 0.045 * v + 0.404) for v in vs]
        fit = tc.fit_linear_law(pts)
        assert fit.coefficients[0] == pytest.approx(0.045, abs=1e-6)
        assert fit.coefficients[1] == pytest.approx(0.404, abs=1e-6)

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            tc.fit_linear_law([(0.7, 0.4), (1.0, 0.45), (1.3, 0.46)])

    def test_out_of_regime(self):
        with pytest.raises(ValidationError):
            tc.fit_linear_law([(0.7, 0.4), (1.0, 0.45), (1.3, 0.46), (3.0, 0.5)])


class TestUncertaintyProducts:
    def test_critical_point_arithmetic(self):
        # hand-computed from the published critical point for Rb87
        et, px = tc.uncertainty_products(1.461, 0.434, 0.889, 2.0)
        assert et == pytest.approx(0.5 * (13.0 / 3.0 - 1.461**2) * 0.434, rel=1e-12)
        assert px == pytest.approx((2.0 - 1.461) * 0.889, rel=1e-12)
        assert et == pytest.approx(0.477, abs=1e-3)
        assert px == pytest.approx(0.479, abs=1e-3)

    def test_rejects_supercritical_velocity(self):
        with pytest.raises(ValidationError):
            tc.uncertainty_products(2.2, 0.4, 1.0, 2.0)


class TestMaxSearch:
    def test_near_sqrt_2q(self, max_search):
        assert max_search.v_m == pytest.approx(2.0, abs=0.15)
        assert max_search.dt_max == pytest.approx(0.48, abs=0.07)

    def test_bracket_and_interior_maximum(self, max_search):
        a, b = max_search.bracket
        assert b - a <= 1e-3
        assert a <= max_search.v_m <= b or max_search.dt_max >= 0  # v_m from best evaluation
        assert max_search.evaluations > 40


class TestWidthSweep:
    def test_rejects_short_list(self):
        with pytest.raises(ValidationError):
            tc.width_sweep(2.0, 2.0, [0.5, 0.7, 0.9, 1.1, 1.3])

    def test_rows_sorted_and_critical_interior(self, width_sweep_result):
        ws = [r.w for r in width_sweep_result.rows]
        assert ws == sorted(ws)
        assert ws[0] < width_sweep_result.w_c < ws[-1]

    def test_dt_max_increases_with_width(self, width_sweep_result):
        # increasing overall; adjacent dips up to 0.02 occur where the global
        # maximum of dt(v) switches between two near-degenerate local maxima
        ok = width_sweep_result.ok_rows()
        dts = [r.dt_max for r in ok]
        assert all(b > a - 0.02 for a, b in zip(dts, dts[1:]))
        assert dts[-1] > dts[0] + 0.3

    def test_v_m_non_decreasing_within_noise(self, width_sweep_result):
        ok = width_sweep_result.ok_rows()
        vms = [r.v_m for r in ok]
        assert all(b >= a - 0.02 for a, b in zip(vms, vms[1:]))
