"""Scenario ingredients: sech soliton initial state, square barrier, energies,
De Broglie wavelength, and the classical/semiclassical reference times.

Everything here is dimensionless (lengths in units of the 1 um base length,
times in units of m*l0^2/hbar; see tunnelclock.units for SI conversion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft as sfft

from .errors import DivergenceError, ValidationError
from .spectral import Grid, WaveField

__all__ = [
    "SOLITON_AMPLITUDE",
    "SOLITON_WIDTH",
    "BarrierSpec",
    "PacketSpec",
    "EnergyBreakdown",
    "init_soliton",
    "square_barrier",
    "energy",
    "analytic_energy",
    "velocity_at_energy",
    "de_broglie",
    "classical_time",
    "semiclassical_time",
]

# Fixed packet shape: amplitude 1/sqrt(2), full width 2*asech(1/2) ~ 2.634.
SOLITON_AMPLITUDE = 1.0 / math.sqrt(2.0)
SOLITON_WIDTH = 2.0 * math.acosh(2.0)

_EDGE_DENSITY_LIMIT = 1e-10


@dataclass(frozen=True)
class BarrierSpec:
    """Square barrier of height q and width w, centered at x = 0."""

    q: float
    w: float

    def __post_init__(self):
        if not self.q > 0:
            raise ValidationError(f"barrier height q must be positive, got {self.q}")
        if not self.w > 0:
            raise ValidationError(f"barrier width w must be positive, got {self.w}")

    @property
    def x_left(self) -> float:
        return -0.5 * self.w

    @property
    def x_right(self) -> float:
        return 0.5 * self.w


@dataclass(frozen=True)
class PacketSpec:
    """Incident soliton: center x0 (left of the barrier) and velocity v."""

    v: float
    x0: float = -15.0

    def __post_init__(self):
        if not math.isfinite(self.v):
            raise ValidationError("velocity must be finite")
        if not self.x0 < 0:
            raise ValidationError(f"packet must start left of the barrier, got x0={self.x0}")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Initial packet energy split into shape, incident, and interaction parts."""

    E0: float
    E_ks: float
    E_kv: float
    E_p: float


def init_soliton(grid: Grid, spec: PacketSpec) -> WaveField:
    """Sech packet (1/sqrt(2)) sech(x - x0) e^{ivx} at t = 0, peak at x0."""
    if abs(grid.x_min - spec.x0) <= 15.0:
        raise ValidationError(
            f"packet at x0={spec.x0} sits too close to the domain edge x_min={grid.x_min}"
        )
    psi = SOLITON_AMPLITUDE / np.cosh(grid.x - spec.x0) * np.exp(1j * spec.v * grid.x)
    edge = max(abs(psi[0]) ** 2, abs(psi[-1]) ** 2)
    if edge > _EDGE_DENSITY_LIMIT:
        raise ValidationError(f"packet edge density {edge:.3e} exceeds {_EDGE_DENSITY_LIMIT:.0e}")
    return WaveField(grid, psi, 0.0)


def square_barrier(grid: Grid, barrier: BarrierSpec) -> np.ndarray:
    """Sharp box potential: q for |x| <= w/2, else 0. No edge smoothing."""
    if not barrier.w < grid.length / 4:
        raise ValidationError(
            f"barrier width {barrier.w} too large for domain of length {grid.length}"
        )
    return np.where(np.abs(grid.x) <= 0.5 * barrier.w, barrier.q, 0.0)


def energy(field: WaveField, u: float, potential: np.ndarray | None = None) -> float:
    """Discrete energy integral with spectral gradient.

    Always includes (1/2)|dpsi/dx|^2 - (u/2)|psi|^4; the optional potential
    term is for conservation checks, not for reported initial energies.
    """
    grid = field.grid
    dpsi = sfft.ifft(1j * grid.k * sfft.fft(field.amplitudes))
    rho = field.density()
    integrand = 0.5 * (dpsi.real**2 + dpsi.imag**2) - 0.5 * u * rho * rho
    if potential is not None:
        integrand = integrand + potential * rho
    return float(np.sum(integrand) * grid.dx)


def analytic_energy(v: float, u: float) -> EnergyBreakdown:
    """Closed-form initial energy of the sech packet: (1 - u + 3 v^2) / 6."""
    e_ks = 1.0 / 6.0
    e_kv = 0.5 * v * v
    e_p = -u / 6.0
    return EnergyBreakdown(E0=e_ks + e_kv + e_p, E_ks=e_ks, E_kv=e_kv, E_p=e_p)


def velocity_at_energy(E0: float) -> float:
    """Velocity giving initial energy E0 at interaction u = 2: sqrt(2 E0 + 1/3)."""
    if E0 < -1.0 / 6.0:
        raise ValidationError(f"E0={E0} is below the packet rest energy -1/6")
    return math.sqrt(2.0 * E0 + 1.0 / 3.0)


def de_broglie(v: float) -> float:
    if not v > 0:
        raise ValidationError(f"De Broglie wavelength needs v > 0, got {v}")
    return 2.0 * math.pi / v


def classical_time(w: float, v: float) -> float:
    """Ballistic traversal time w/v."""
    if not v > 0:
        raise ValidationError(f"classical time needs v > 0, got {v}")
    return w / v


def semiclassical_time(w: float, q: float, E0: float) -> float:
    """Traversal estimate w / sqrt(2|q - E0|) from the under/over-barrier momentum."""
    gap = abs(q - E0)
    if gap < 1e-9:
        raise DivergenceError(f"semiclassical time diverges at E0 = q = {q}")
    return w / math.sqrt(2.0 * gap)
