"""Boundary-density chronometry.

The entry and exit moments of a collision are the times of maximum
probability density at the barrier's left and right boundaries; their
difference is the tunneling time. Peaks are located as global maxima of the
sampled series and refined by quadratic interpolation through the three
samples around the discrete maximum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import CollisionIncompleteError, DegeneratePeakError, InteractionOngoingError
from .physics import BarrierSpec
from .spectral import WaveField

__all__ = [
    "BoundaryRecord",
    "TunnelingResult",
    "PeakInfo",
    "sample_boundaries",
    "extract_times",
    "tunneling_probability",
]

# Decay of each boundary series below this fraction of its peak marks a
# complete collision.
_DECAY_FRACTION = 0.01
# Boundary density below which the packet no longer overlaps a boundary.
_CLEARED_DENSITY = 1e-4


@dataclass
class BoundaryRecord:
    """Time series of |psi|^2 at the two barrier boundaries."""

    times: list[float] = field(default_factory=list)
    rho_L: list[float] = field(default_factory=list)
    rho_R: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    def append(self, t: float, rho_l: float, rho_r: float) -> None:
        """Append one sample; a re-sample at the last recorded time is a no-op."""
        if self.times:
            if t == self.times[-1]:
                return
            if t < self.times[-1]:
                raise ValueError(f"non-increasing sample time {t} after {self.times[-1]}")
        self.times.append(t)
        self.rho_L.append(rho_l)
        self.rho_R.append(rho_r)

    def write_csv(self, out: IO[str]) -> None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", "rho_L", "rho_R"])
        for t, l, r in zip(self.times, self.rho_L, self.rho_R):
            writer.writerow([repr(t), repr(l), repr(r)])


@dataclass(frozen=True)
class PeakInfo:
    """Refined peak location plus diagnostics of the discrete maximum."""

    t_peak: float
    value: float
    curvature: float  # second derivative of the local quadratic, <= 0
    index: int


@dataclass(frozen=True)
class TunnelingResult:
    t_in: float
    t_out: float
    dt_tunnel: float
    transmission: float
    diagnostics: dict


def _interp_density(field: WaveField, x: float) -> float:
    """|psi|^2 at x, linearly interpolated between the bracketing grid points."""
    grid = field.grid
    pos = (x - grid.x_min) / grid.dx
    i = int(np.floor(pos))
    frac = pos - i
    if i < 0 or i + 1 >= grid.n:
        raise ValueError(f"position {x} outside the grid")
    rho = field.density()
    return float((1.0 - frac) * rho[i] + frac * rho[i + 1])


def sample_boundaries(field: WaveField, barrier: BarrierSpec, record: BoundaryRecord) -> BoundaryRecord:
    """Append the interpolated boundary densities at the field's time."""
    record.append(
        field.t,
        _interp_density(field, barrier.x_left),
        _interp_density(field, barrier.x_right),
    )
    return record


def _refine_peak(times: np.ndarray, series: np.ndarray, label: str) -> PeakInfo:
    i = int(np.argmax(series))
    peak = float(series[i])
    if peak <= 0.0 or i == 0 or i == len(series) - 1:
        raise DegeneratePeakError(f"{label} boundary maximum is degenerate (index {i}, value {peak:.3e})")
    y0, y1, y2 = float(series[i - 1]), float(series[i]), float(series[i + 1])
    denom = y0 - 2.0 * y1 + y2
    dt_l = times[i] - times[i - 1]
    dt_r = times[i + 1] - times[i]
    h = 0.5 * (dt_l + dt_r)
    if denom >= 0.0:
        # flat to machine precision; keep the discrete sample
        return PeakInfo(t_peak=float(times[i]), value=y1, curvature=0.0, index=i)
    shift = 0.5 * (y0 - y2) / denom
    shift = float(np.clip(shift, -1.0, 1.0))  # never move past a neighboring sample
    t_peak = float(times[i] + shift * h)
    value = y1 - 0.25 * (y0 - y2) * shift
    return PeakInfo(t_peak=t_peak, value=float(value), curvature=float(denom / (h * h)), index=i)


def _check_complete(record: BoundaryRecord) -> None:
    for label, series in (("left", record.rho_L), ("right", record.rho_R)):
        arr = np.asarray(series)
        if len(arr) < 3:
            raise CollisionIncompleteError("record too short")
        peak = float(arr.max())
        if peak <= 0.0:
            raise DegeneratePeakError(f"{label} boundary series is identically zero")
        if arr[-1] > _DECAY_FRACTION * peak:
            raise CollisionIncompleteError(
                f"{label} boundary density has not decayed below "
                f"{_DECAY_FRACTION:.0%} of its peak by the final sample"
            )


def extract_times(record: BoundaryRecord) -> tuple[float, float]:
    t_in, t_out, _, _ = extract_times_detailed(record)
    return t_in, t_out


def extract_times_detailed(record: BoundaryRecord) -> tuple[float, float, PeakInfo, PeakInfo]:
    """(t_in, t_out, left peak info, right peak info) from a complete record."""
    _check_complete(record)
    times = np.asarray(record.times)
    left = _refine_peak(times, np.asarray(record.rho_L), "left")
    right = _refine_peak(times, np.asarray(record.rho_R), "right")
    return left.t_peak, right.t_peak, left, right


def tunneling_probability(field: WaveField, barrier: BarrierSpec) -> float:
    """Probability right of the barrier, valid once both boundaries are clear."""
    rho_l = _interp_density(field, barrier.x_left)
    rho_r = _interp_density(field, barrier.x_right)
    if rho_l >= _CLEARED_DENSITY or rho_r >= _CLEARED_DENSITY:
        raise InteractionOngoingError(
            f"boundary densities ({rho_l:.3e}, {rho_r:.3e}) still above {_CLEARED_DENSITY:.0e}"
        )
    mask = field.grid.x > barrier.x_right
    return float(np.sum(field.density()[mask]) * field.grid.dx)
