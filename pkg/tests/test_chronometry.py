import io
import math

import numpy as np
import pytest

import tunnelclock as tc
from tunnelclock.chronometry import extract_times_detailed
from tunnelclock.errors import (
    CollisionIncompleteError,
    DegeneratePeakError,
    InteractionOngoingError,
)


@pytest.fixture
def barrier():
    return tc.BarrierSpec(q=2.0, w=1.0)


def _sech_field(grid, center, v=0.0):
    psi = (1.0 / math.sqrt(2.0)) / np.cosh(grid.x - center) * np.exp(1j * v * grid.x)
    return tc.WaveField(grid, psi, 0.0)


class TestSampleBoundaries:
    def test_peak_on_left_boundary(self, grid, barrier):
        record = tc.BoundaryRecord()
        tc.sample_boundaries(_sech_field(grid, barrier.x_left), barrier, record)
        assert record.rho_L[0] == pytest.approx(0.5, abs=1e-3)

    def test_far_field_near_zero(self, grid, barrier):
        record = tc.BoundaryRecord()
        tc.sample_boundaries(_sech_field(grid, barrier.x_left - 15.0), barrier, record)
        assert record.rho_L[0] < 1e-8
        assert record.rho_R[0] < 1e-8

    def test_symmetric_field(self, grid, barrier):
        record = tc.BoundaryRecord()
        tc.sample_boundaries(_sech_field(grid, 0.0), barrier, record)
        assert record.rho_L[0] == pytest.approx(record.rho_R[0], abs=1e-12)


class TestBoundaryRecord:
    def test_duplicate_time_is_noop(self):
        record = tc.BoundaryRecord()
        record.append(0.0, 1.0, 2.0)
        record.append(0.0, 9.0, 9.0)
        assert len(record) == 1
        assert record.rho_L == [1.0]

    def test_rejects_decreasing_time(self):
        record = tc.BoundaryRecord()
        record.append(1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            record.append(0.5, 0.0, 0.0)

    def test_csv_export(self):
        record = tc.BoundaryRecord()
        record.append(0.0, 0.125, 0.25)
        record.append(0.01, 0.5, 0.75)
        buf = io.StringIO()
        record.write_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "t,rho_L,rho_R"
        assert lines[1] == "0.0,0.125,0.25"


def _gaussian_record(t_l=5.0, t_r=5.45, dt=0.01, t_end=12.0):
    record = tc.BoundaryRecord()
    t = 0.0
    while t <= t_end:
        record.append(t, math.exp(-((t - t_l) ** 2)), math.exp(-((t - t_r) ** 2)))
        t += dt
    return record


class TestExtractTimes:
    def test_synthetic_gaussian_peaks(self):
        t_in, t_out = tc.extract_times(_gaussian_record())
        assert t_in == pytest.approx(5.0, abs=1e-3)
        assert t_out == pytest.approx(5.45, abs=1e-3)
        assert t_out - t_in == pytest.approx(0.45, abs=1e-3)

    def test_incomplete_record(self):
        record = _gaussian_record(t_end=5.2)  # right peak not yet decayed
        with pytest.raises(CollisionIncompleteError):
            tc.extract_times(record)

    def test_flat_zero_series_is_degenerate(self):
        record = tc.BoundaryRecord()
        for i in range(200):
            t = 0.05 * i
            record.append(t, math.exp(-((t - 5.0) ** 2)), 0.0)
        with pytest.raises(DegeneratePeakError):
            tc.extract_times(record)

    def test_edge_peak_is_degenerate(self):
        record = tc.BoundaryRecord()
        for i in range(200):
            t = 0.05 * i
            # right series peaks on the very first sample but still decays
            # below 1% by the end, so completeness passes and refinement
            # has no bracketing neighbour
            record.append(t, math.exp(-((t - 5.0) ** 2)), math.exp(-t))
        with pytest.raises(DegeneratePeakError):
            tc.extract_times(record)

    def test_refinement_stays_within_one_sample(self):
        record = _gaussian_record(t_l=5.004, t_r=5.447)
        times = np.asarray(record.times)
        t_in, t_out, left, right = extract_times_detailed(record)
        assert abs(t_in - times[left.index]) <= 0.01
        assert abs(t_out - times[right.index]) <= 0.01
        assert t_in == pytest.approx(5.004, abs=1e-3)
        assert t_out == pytest.approx(5.447, abs=1e-3)
        assert left.curvature < 0


class TestTunnelingProbability:
    def test_fully_left(self, grid, barrier):
        assert tc.tunneling_probability(_sech_field(grid, -12.0), barrier) == pytest.approx(
            0.0, abs=1e-8
        )

    def test_fully_right(self, grid, barrier):
        assert tc.tunneling_probability(_sech_field(grid, 12.0), barrier) == pytest.approx(
            1.0, abs=1e-8
        )

    def test_rejects_overlapping_packet(self, grid, barrier):
        with pytest.raises(InteractionOngoingError):
            tc.tunneling_probability(_sech_field(grid, -3.0), barrier)
