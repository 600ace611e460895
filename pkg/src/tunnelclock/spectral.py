"""Periodic grid, complex wave field, and the Strang split-step spectral stepper.

The equation integrated is

    i dpsi/dt = [-(1/2) d^2/dx^2 + V(x) - u |psi|^2] psi

on a uniform periodic grid. One Strang step is a half phase rotation by
(V - u|psi|^2), an exact kinetic step in Fourier space, and a second half
phase rotation with the updated density. All three factors are unimodular,
so the discrete norm is conserved to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft
from numba import njit

from .errors import NumericsError, ValidationError

__all__ = ["Grid", "WaveField", "StepperConfig", "make_grid", "step", "propagate"]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic 1D lattice with its matched wavenumber lattice."""

    x_min: float
    x_max: float
    n: int
    dx: float
    x: np.ndarray = dc_field(repr=False)
    k: np.ndarray = dc_field(repr=False)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


@dataclass
class WaveField:
    """Complex amplitudes on a grid at simulation time t."""

    grid: Grid
    amplitudes: np.ndarray
    t: float = 0.0

    def density(self) -> np.ndarray:
        a = self.amplitudes
        return a.real * a.real + a.imag * a.imag

    def norm(self) -> float:
        """Discrete probability integral sum(|psi|^2) dx."""
        return float(np.sum(self.density()) * self.grid.dx)

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.amplitudes.copy(), self.t)


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    sample_every: int = 10
    t_final: float = 10.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.sample_every < 1:
            raise ValidationError(f"sample_every must be >= 1, got {self.sample_every}")
        if not self.t_final > 0:
            raise ValidationError(f"t_final must be positive, got {self.t_final}")


def make_grid(x_min: float, x_max: float, n: int) -> Grid:
    """Build a periodic grid on [x_min, x_max) with n points, n a power of two."""
    if n < 8 or (n & (n - 1)) != 0:
        raise ValidationError(f"n must be a power of two >= 8, got {n}")
    if not x_min < x_max:
        raise ValidationError(f"degenerate interval [{x_min}, {x_max}]")
    dx = (x_max - x_min) / n
    x = x_min + dx * np.arange(n)
    k = 2.0 * np.pi * sfft.fftfreq(n, d=dx)
    return Grid(x_min=x_min, x_max=x_max, n=n, dx=dx, x=x, k=k)


@njit(cache=True)
def _phase_rotate(psi: np.ndarray, V: np.ndarray, u: float, dt: float) -> np.ndarray:
    """Pointwise multiply by exp(-i (V - u|psi|^2) dt); |psi|^2 is phase-invariant."""
    out = np.empty_like(psi)
    for i in range(psi.shape[0]):
        p = psi[i]
        rho = p.real * p.real + p.imag * p.imag
        phi = -dt * (V[i] - u * rho)
        c = np.cos(phi)
        s = np.sin(phi)
        out[i] = complex(p.real * c - p.imag * s, p.real * s + p.imag * c)
    return out


def _kinetic(psi: np.ndarray, kin_phase: np.ndarray) -> np.ndarray:
    return sfft.ifft(kin_phase * sfft.fft(psi), overwrite_x=True)


def _kinetic_phase(k: np.ndarray, dt: float) -> np.ndarray:
    return np.exp(-0.5j * k * k * dt)


def step(field: WaveField, potential: np.ndarray, u: float, dt: float) -> WaveField:
    """One Strang split step of size dt. Returns a new field at t + dt."""
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if potential.shape != field.amplitudes.shape:
        raise ValidationError("potential length does not match grid size")
    psi = _phase_rotate(field.amplitudes, potential, u, 0.5 * dt)
    psi = _kinetic(psi, _kinetic_phase(field.grid.k, dt))
    psi = _phase_rotate(psi, potential, u, 0.5 * dt)
    return WaveField(field.grid, psi, field.t + dt)


def propagate(
    field: WaveField,
    potential: np.ndarray,
    u: float,
    cfg: StepperConfig,
    observer: Optional[Callable[[WaveField], None]] = None,
) -> WaveField:
    """Advance the field to cfg.t_final with Strang steps of cfg.dt.

    The observer is invoked on the initial field, after every
    cfg.sample_every-th step, and once more on the final field. Interior
    half phase rotations of adjacent steps are fused into full rotations;
    the fields seen by the observer are exact Strang-step states.

    Amplitudes are checked for NaN/Inf at each sample; a failure raises
    NumericsError naming the offending step index.
    """
    if not cfg.t_final > field.t:
        raise ValidationError(f"t_final={cfg.t_final} is not ahead of field.t={field.t}")
    n_steps = int(round((cfg.t_final - field.t) / cfg.dt))
    if n_steps < 1:
        raise ValidationError("propagation window shorter than one step")
    if potential.shape != field.amplitudes.shape:
        raise ValidationError("potential length does not match grid size")

    t0 = field.t
    dt = cfg.dt
    grid = field.grid
    kin = _kinetic_phase(grid.k, dt)
    half = 0.5 * dt

    def emit(psi: np.ndarray, i: int) -> None:
        if not np.all(np.isfinite(psi)):
            raise NumericsError(f"non-finite amplitudes at step {i} (t={t0 + i * dt:.6g})")
        if observer is not None:
            observer(WaveField(grid, psi.copy(), t0 + i * dt))

    emit(field.amplitudes, 0)
    psi = _phase_rotate(field.amplitudes, potential, u, half)
    for i in range(1, n_steps + 1):
        psi = _kinetic(psi, kin)
        if i % cfg.sample_every == 0 or i == n_steps:
            psi = _phase_rotate(psi, potential, u, half)
            if i % cfg.sample_every == 0:
                emit(psi, i)
            if i < n_steps:
                psi = _phase_rotate(psi, potential, u, half)
        else:
            psi = _phase_rotate(psi, potential, u, dt)
    emit(psi, n_steps)
    return WaveField(grid, psi, t0 + n_steps * dt)
