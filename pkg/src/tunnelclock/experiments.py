"""Experiment drivers: single collision runs, velocity sweeps with regime
fits and bounds, the maximum-tunneling-time search, and the barrier-width
sweep with critical-width detection and uncertainty products.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from . import units
from .chronometry import BoundaryRecord, TunnelingResult, extract_times_detailed
from .errors import (
    CollisionIncompleteError,
    DegeneratePeakError,
    DivergenceError,
    TunnelclockError,
    ValidationError,
)
from .physics import (
    BarrierSpec,
    PacketSpec,
    analytic_energy,
    classical_time,
    init_soliton,
    semiclassical_time,
    square_barrier,
    velocity_at_energy,
)
from .spectral import StepperConfig, make_grid, propagate

__all__ = [
    "ScenarioConfig",
    "SweepRow",
    "SweepTable",
    "FitResult",
    "MaxSearchResult",
    "WidthRow",
    "WidthSweepResult",
    "run_scenario",
    "velocity_sweep",
    "fit_log_law",
    "fit_linear_law",
    "find_max_tunneling_time",
    "width_sweep",
    "uncertainty_products",
]

# Boundary density below which the packet has cleared a boundary; the
# transmission is read at the first post-peak sample where both hold.
_CLEARED_DENSITY = 1e-4
# Guard band in v excluded around regime boundaries when auto-selecting fit windows.
REGIME_GUARD_BAND = 0.05
WIDTH_FIT_GUARD_BAND = 0.1


@dataclass(frozen=True)
class ScenarioConfig:
    """One collision scenario: barrier, interaction, packet, and numerics."""

    v: float
    q: float = 2.0
    w: float = 1.0
    u: float = 2.0
    x0: float = -15.0
    x_min: float = -60.0
    x_max: float = 60.0
    n: int = 4096
    dt: float = 1e-3
    sample_every: int = 10
    t_final_cap: float = 200.0
    species: str = "Rb87"

    def __post_init__(self):
        if not 0 < self.v <= 50:
            raise ValidationError(f"v must be in (0, 50], got {self.v}")
        if not 0 < self.q <= 100:
            raise ValidationError(f"q must be in (0, 100], got {self.q}")
        if not self.x_min < 0 < self.x_max:
            raise ValidationError(f"domain [{self.x_min}, {self.x_max}] must straddle 0")
        if not 0 < self.w < (self.x_max - self.x_min) / 4:
            raise ValidationError(f"w must be in (0, domain/4), got {self.w}")
        if not 0 <= self.u <= 100:
            raise ValidationError(f"u must be in [0, 100], got {self.u}")
        if not self.x0 < -0.5 * self.w - 5:
            raise ValidationError(f"x0 must be below -w/2 - 5, got {self.x0}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValidationError(f"n must be a power of two >= 8, got {self.n}")
        if not 0 < self.dt <= 0.05:
            raise ValidationError(f"dt must be in (0, 0.05], got {self.dt}")
        if self.sample_every < 1:
            raise ValidationError(f"sample_every must be >= 1, got {self.sample_every}")
        if not 0 < self.t_final_cap <= 10000:
            raise ValidationError(f"t_final_cap must be in (0, 10000], got {self.t_final_cap}")

    def barrier(self) -> BarrierSpec:
        return BarrierSpec(q=self.q, w=self.w)

    def packet(self) -> PacketSpec:
        return PacketSpec(v=self.v, x0=self.x0)


def run_scenario(cfg: ScenarioConfig, record: BoundaryRecord | None = None) -> TunnelingResult:
    """Propagate one collision and extract entry/exit times and transmission.

    The propagation target time starts from a velocity-based estimate and is
    extended geometrically until the boundary record spans the full collision
    and both boundaries have cleared, up to cfg.t_final_cap. Passing a
    BoundaryRecord captures the sampled series for export.
    """
    grid = make_grid(cfg.x_min, cfg.x_max, cfg.n)
    barrier = cfg.barrier()
    potential = square_barrier(grid, barrier)
    field = init_soliton(grid, cfg.packet())

    if record is None:
        record = BoundaryRecord()
    prob_left: list[float] = []
    prob_inside: list[float] = []
    prob_right: list[float] = []
    edge_prob_max = 0.0

    dx = grid.dx
    mask_left = grid.x < barrier.x_left
    mask_inside = (grid.x >= barrier.x_left) & (grid.x <= barrier.x_right)
    mask_right = grid.x > barrier.x_right
    # interpolation stencils for the two boundary positions
    pos_l = (barrier.x_left - grid.x_min) / dx
    pos_r = (barrier.x_right - grid.x_min) / dx
    il, fl = int(math.floor(pos_l)), pos_l - math.floor(pos_l)
    ir, fr = int(math.floor(pos_r)), pos_r - math.floor(pos_r)

    def observer(f) -> None:
        nonlocal edge_prob_max
        if record.times and f.t <= record.times[-1]:
            return
        rho = f.density()
        record.append(
            f.t,
            float((1 - fl) * rho[il] + fl * rho[il + 1]),
            float((1 - fr) * rho[ir] + fr * rho[ir + 1]),
        )
        prob_left.append(float(rho[mask_left].sum() * dx))
        prob_inside.append(float(rho[mask_inside].sum() * dx))
        prob_right.append(float(rho[mask_right].sum() * dx))
        edge = (rho[0] + rho[1] + rho[-2] + rho[-1]) * dx
        edge_prob_max = max(edge_prob_max, float(edge))

    t_arrive = (barrier.x_left - cfg.x0) / cfg.v
    target = min(cfg.t_final_cap, t_arrive + 6.0 / cfg.v + 5.0)
    extensions = 0
    last_err: TunnelclockError | None = None
    while True:
        field = propagate(field, potential, cfg.u, StepperConfig(cfg.dt, cfg.sample_every, target), observer)
        try:
            t_in, t_out, left, right = extract_times_detailed(record)
            meas = _measurement_index(record, max(left.index, right.index))
            if meas is not None:
                break
            last_err = CollisionIncompleteError("boundaries have not cleared below 1e-4")
        except (CollisionIncompleteError, DegeneratePeakError) as err:
            last_err = err
        if target >= cfg.t_final_cap - 0.5 * cfg.dt:
            raise CollisionIncompleteError(
                f"t_final cap {cfg.t_final_cap} exceeded for v={cfg.v}: {last_err}"
            )
        target = min(cfg.t_final_cap, target * 1.4)
        extensions += 1

    return TunnelingResult(
        t_in=t_in,
        t_out=t_out,
        dt_tunnel=t_out - t_in,
        transmission=prob_right[meas],
        diagnostics={
            "rho_L_peak": left.value,
            "rho_R_peak": right.value,
            "curvature_L": left.curvature,
            "curvature_R": right.curvature,
            "t_measurement": record.times[meas],
            "prob_left": prob_left[meas],
            "prob_inside": prob_inside[meas],
            "prob_right": prob_right[meas],
            "max_edge_probability": edge_prob_max,
            "t_end": field.t,
            "extensions": extensions,
        },
    )


def _measurement_index(record: BoundaryRecord, after: int) -> int | None:
    """First sample past both peaks where both boundary densities are cleared."""
    for j in range(after + 1, len(record)):
        if record.rho_L[j] < _CLEARED_DENSITY and record.rho_R[j] < _CLEARED_DENSITY:
            return j
    return None


# ---------------------------------------------------------------------------
# velocity sweep


@dataclass(frozen=True)
class SweepRow:
    v: float
    E0: float
    dt_tunnel: float | None
    transmission: float | None
    t_classical: float
    t_semiclassical: float | None
    regime: str
    status: str = "ok"


@dataclass(frozen=True)
class SweepTable:
    q: float
    w: float
    u: float
    rows: tuple[SweepRow, ...]

    def ok_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.status == "ok"]

    def regime_points(self, regime: str) -> list[tuple[float, float]]:
        return [(r.v, r.dt_tunnel) for r in self.ok_rows() if r.regime == regime]


def regime_label(E0: float, q: float) -> str:
    """I below zero energy, II up to the barrier height (edges inclusive), III above."""
    if E0 < 0:
        return "I"
    if E0 <= q:
        return "II"
    return "III"


def _row_worker(cfg: ScenarioConfig) -> tuple[float | None, float | None, str]:
    try:
        res = run_scenario(cfg)
        return res.dt_tunnel, res.transmission, "ok"
    except TunnelclockError as err:
        return None, None, f"{type(err).__name__}: {err}"


def _map_ordered(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def velocity_sweep(
    q: float,
    w: float,
    u: float,
    v_list: Sequence[float],
    *,
    workers: int = 1,
    **numerics,
) -> SweepTable:
    """One collision per velocity; failures become gap rows, not aborts."""
    v_list = list(v_list)
    if any(not v > 0 for v in v_list):
        raise ValidationError("all sweep velocities must be positive")
    if sorted(v_list) != v_list:
        raise ValidationError("v_list must be sorted ascending")
    configs = [ScenarioConfig(v=v, q=q, w=w, u=u, **numerics) for v in v_list]
    outcomes = _map_ordered(_row_worker, configs, workers)
    rows = []
    for v, (dt_tun, trans, status) in zip(v_list, outcomes):
        e0 = analytic_energy(v, u).E0
        try:
            t_semi = semiclassical_time(w, q, e0)
        except DivergenceError:
            t_semi = None
        rows.append(
            SweepRow(
                v=v,
                E0=e0,
                dt_tunnel=dt_tun,
                transmission=trans,
                t_classical=classical_time(w, v),
                t_semiclassical=t_semi,
                regime=regime_label(e0, q),
                status=status,
            )
        )
    return SweepTable(q=q, w=w, u=u, rows=tuple(rows))


# ---------------------------------------------------------------------------
# regime-law fits


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: tuple[float, ...]
    residual_rms: float
    point_count: int


def _least_squares_line(x: np.ndarray, y: np.ndarray, model: str) -> FitResult:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return FitResult(
        model=model,
        coefficients=(float(slope), float(intercept)),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        point_count=len(x),
    )


def fit_log_law(points: Iterable[tuple[float, float]], u: float = 2.0) -> FitResult:
    """Fit dt = A log10(v) + B over negative-energy points; returns (A, B)."""
    pts = sorted(points)
    if len(pts) < 4:
        raise ValidationError(f"log-law fit needs >= 4 points, got {len(pts)}")
    for v, _ in pts:
        if analytic_energy(v, u).E0 >= 0:
            raise ValidationError(f"point v={v} has non-negative energy; outside regime I")
    v_arr = np.array([p[0] for p in pts])
    t_arr = np.array([p[1] for p in pts])
    return _least_squares_line(np.log10(v_arr), t_arr, "log-law")


def fit_linear_law(points: Iterable[tuple[float, float]], q: float = 2.0, u: float = 2.0) -> FitResult:
    """Fit dt = alpha v + beta over 0 < E0 < q points; returns (alpha, beta)."""
    pts = sorted(points)
    if len(pts) < 4:
        raise ValidationError(f"linear-law fit needs >= 4 points, got {len(pts)}")
    for v, _ in pts:
        e0 = analytic_energy(v, u).E0
        if not 0 < e0 < q:
            raise ValidationError(f"point v={v} (E0={e0:.4f}) is outside regime II")
    v_arr = np.array([p[0] for p in pts])
    t_arr = np.array([p[1] for p in pts])
    return _least_squares_line(v_arr, t_arr, "linear-law")


# ---------------------------------------------------------------------------
# maximum tunneling time


@dataclass(frozen=True)
class MaxSearchResult:
    v_m: float
    dt_max: float
    bracket: tuple[float, float]
    evaluations: int


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def find_max_tunneling_time(
    q: float,
    w: float,
    u: float = 2.0,
    *,
    v_tol: float = 1e-3,
    coarse_step: float = 0.05,
    workers: int = 1,
    **numerics,
) -> MaxSearchResult:
    """Locate the velocity maximizing the tunneling time at fixed barrier.

    Coarse scan from just above the zero-energy velocity to a little past the
    barrier-height velocity, then golden-section refinement of the best
    bracket down to v_tol.
    """
    v_lo = velocity_at_energy(0.0) + 0.05
    v_hi = velocity_at_energy(q) + 0.5
    count = int(math.floor((v_hi - v_lo) / coarse_step)) + 1
    scan = [v_lo + i * coarse_step for i in range(count)]

    evaluations = 0

    def measure(v: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return run_scenario(ScenarioConfig(v=v, q=q, w=w, u=u, **numerics)).dt_tunnel

    def scan_worker(v: float) -> float:
        return run_scenario(ScenarioConfig(v=v, q=q, w=w, u=u, **numerics)).dt_tunnel

    coarse = _map_ordered(scan_worker, scan, workers)
    evaluations += len(scan)
    i_best = int(np.argmax(coarse))
    if i_best == 0 or i_best == len(scan) - 1:
        raise ValidationError(
            f"no interior maximum: coarse scan peaks at the edge v={scan[i_best]}"
        )

    best_v, best_dt = scan[i_best], coarse[i_best]
    a, b = scan[i_best - 1], scan[i_best + 1]
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = measure(c), measure(d)
    while b - a > v_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = measure(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = measure(d)
        for v, f in ((c, fc), (d, fd)):
            if f > best_dt:
                best_v, best_dt = v, f
    return MaxSearchResult(v_m=best_v, dt_max=best_dt, bracket=(a, b), evaluations=evaluations)


def uncertainty_products(v_m: float, dt_max: float, w: float, q: float) -> tuple[float, float]:
    """(energy-time, momentum-space) uncertainty products, in units of hbar.

    Energy spread is taken to the critical velocity v_E = sqrt(2q + 1/3);
    momentum spread to v_q = sqrt(2q); position spread is the barrier width.
    """
    v_e = math.sqrt(2.0 * q + 1.0 / 3.0)
    if v_m >= v_e:
        raise ValidationError(f"v_m={v_m} is not below the critical velocity v_E={v_e:.4f}")
    energy_time = 0.5 * (v_e * v_e - v_m * v_m) * dt_max
    momentum_space = (math.sqrt(2.0 * q) - v_m) * w
    return energy_time, momentum_space


# ---------------------------------------------------------------------------
# width sweep


@dataclass(frozen=True)
class WidthRow:
    w: float
    dt_max: float | None
    v_m: float | None
    energy_time: float | None
    momentum_space: float | None
    status: str = "ok"


@dataclass(frozen=True)
class WidthSweepResult:
    q: float
    u: float
    species: str
    rows: tuple[WidthRow, ...]
    w_c: float
    below_fit: FitResult
    above_fit: FitResult

    def ok_rows(self) -> list[WidthRow]:
        return [r for r in self.rows if r.status == "ok"]

    def critical_row(self) -> WidthRow:
        """Valid row closest to the critical width."""
        return min(self.ok_rows(), key=lambda r: abs(r.w - self.w_c))


def _width_worker(args: tuple) -> tuple[float, float | None, float | None, str]:
    w, q, u, numerics = args
    try:
        res = find_max_tunneling_time(q, w, u, **numerics)
        return w, res.dt_max, res.v_m, "ok"
    except TunnelclockError as err:
        return w, None, None, f"{type(err).__name__}: {err}"


def width_sweep(
    q: float,
    u: float,
    w_list: Sequence[float],
    species_name: str = "Rb87",
    *,
    workers: int = 1,
    cache: dict[float, tuple[float, float]] | None = None,
    **numerics,
) -> WidthSweepResult:
    """Maximum-tunneling-time search per width, critical-width detection, and
    piecewise-linear SI fits below/above the critical width.

    cache maps a width to a previously computed (dt_max, v_m) pair; cached
    widths are not re-run.
    """
    w_list = sorted(w_list)
    if len(w_list) < 6:
        raise ValidationError(f"width sweep needs >= 6 widths, got {len(w_list)}")
    profile = units.species(species_name)
    cache = cache or {}

    todo = [w for w in w_list if w not in cache]
    outcomes = _map_ordered(_width_worker, [(w, q, u, numerics) for w in todo], workers)
    results: dict[float, tuple[float | None, float | None, str]] = {
        w: (dt_max, v_m, status) for w, dt_max, v_m, status in outcomes
    }
    for w, (dt_max, v_m) in cache.items():
        results[w] = (dt_max, v_m, "ok")

    rows = []
    for w in w_list:
        dt_max, v_m, status = results[w]
        if status == "ok":
            et, px = uncertainty_products(v_m, dt_max, w, q)
        else:
            et = px = None
        rows.append(WidthRow(w=w, dt_max=dt_max, v_m=v_m, energy_time=et, momentum_space=px, status=status))

    valid = [r for r in rows if r.status == "ok"]
    if len(valid) < 6:
        raise ValidationError("too few valid rows to locate the critical width")
    # critical width: midpoint of the interval where v_m changes fastest
    slopes = [
        abs((b.v_m - a.v_m) / (b.w - a.w)) for a, b in zip(valid[:-1], valid[1:])
    ]
    j = int(np.argmax(slopes))
    w_c = 0.5 * (valid[j].w + valid[j + 1].w)
    # The piecewise-linear fits describe the asymptotic branches; rows inside
    # one coarse grid step of w_c are mid-transition and belong to neither.
    below = [r for r in valid if r.w <= w_c - WIDTH_FIT_GUARD_BAND]
    above = [r for r in valid if r.w >= w_c + WIDTH_FIT_GUARD_BAND]
    if len(below) < 3 or len(above) < 3:
        raise ValidationError(
            f"critical width {w_c} leaves fewer than 3 rows on one side; widen the sweep"
        )
    ms = profile.time_unit * 1e3
    below_fit = _least_squares_line(
        np.array([r.w for r in below]), np.array([r.dt_max * ms for r in below]), "linear-law"
    )
    above_fit = _least_squares_line(
        np.array([r.w for r in above]), np.array([r.dt_max * ms for r in above]), "linear-law"
    )
    return WidthSweepResult(
        q=q,
        u=u,
        species=species_name,
        rows=tuple(rows),
        w_c=w_c,
        below_fit=below_fit,
        above_fit=above_fit,
    )
