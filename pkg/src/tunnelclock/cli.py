"""Command-line front end.

Subcommands map one-to-one onto the experiment and unit operations:
simulate, sweep-velocity, find-max, sweep-width, fit, convert. Outputs are
CSV (header row, full double precision) plus a JSON summary whose keys
mirror the result-type field names; --plot adds self-contained SVG charts.

Exit codes: 0 success, 1 validation error, 2 numerics failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, units
from .chronometry import BoundaryRecord
from .errors import TunnelclockError, ValidationError
from .experiments import ScenarioConfig
from .physics import analytic_energy, semiclassical_time, velocity_at_energy
from .svgchart import LineChart

_SCHEMA_PATH = Path(__file__).with_name("schema.json")

_CONFIG_TYPES = {
    "q": float,
    "w": float,
    "u": float,
    "x0": float,
    "v": float,
    "x_min": float,
    "x_max": float,
    "n": int,
    "dt": float,
    "sample_every": int,
    "t_final_cap": float,
    "species": str,
    "workers": int,
}

_COLUMN_DOC = """\
output column reference (also shipped as schema.json next to the package):
  boundary_record.csv : t, rho_L, rho_R
  sweep.csv (velocity): v, E0, dt_tunnel, transmission, t_classical,
                        t_semiclassical, regime, status
  sweep.csv (width)   : w, dt_max, v_m, energy_time, momentum_space, status
"""


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the contract reserves 2
    # for numerics failures, so route everything through ValidationError.
    def error(self, message):
        raise ValidationError(message)


def parse_config(path: str) -> dict:
    """Read a flat key = value file ('#' comments) into typed values."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _CONFIG_TYPES:
                raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_TYPES[key](val)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: cannot parse {val!r} for {key}") from None
    return values


def _scenario_kwargs(args, need_v: bool) -> dict:
    vals = parse_config(args.config) if args.config else {}
    for key in _CONFIG_TYPES:
        if key == "workers":
            continue
        flag = getattr(args, key, None)
        if flag is not None:
            vals[key] = flag
    vals.pop("workers", None)
    if need_v and "v" not in vals:
        raise ValidationError("incident velocity required: pass --v or set v in the config file")
    if not need_v:
        vals.pop("v", None)
    return vals


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("TUNNELCLOCK_WORKERS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"TUNNELCLOCK_WORKERS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def _jsonify(obj):
    if dataclasses.is_dataclass(obj):
        return _jsonify(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonify(payload), fh, indent=2)
        fh.write("\n")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _frange(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0 or hi < lo:
        raise ValidationError(f"bad range [{lo}, {hi}] step {step}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    cfg = ScenarioConfig(**_scenario_kwargs(args, need_v=True))
    record = BoundaryRecord()
    result = experiments.run_scenario(cfg, record=record)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "result.json", result)
    with open(outdir / "boundary_record.csv", "w", encoding="utf-8", newline="") as fh:
        record.write_csv(fh)
    print(
        f"t_in={result.t_in:.6f} t_out={result.t_out:.6f} "
        f"dt_tunnel={result.dt_tunnel:.6f} transmission={result.transmission:.6f}"
    )
    return 0


def _plot_fig2(table: experiments.SweepTable, outdir: Path) -> None:
    ok = table.ok_rows()
    vs = [r.v for r in ok]
    fig_a = LineChart(
        title="Tunneling time vs incident velocity",
        xlabel="v",
        ylabel="tunneling time",
    )
    dts = [r.dt_tunnel for r in ok]
    cap = 2.5 * max(dts) if dts else 1.0
    dense = np.linspace(min(vs), max(vs), 400) if vs else np.array([])
    fig_a.add_series(vs, dts, label="measured", markers=True, line=False)
    fig_a.add_series(dense, [table.w / v for v in dense], label="classical w/v", dash="6,3")
    semi_x, semi_y = [], []
    for v in dense:
        e0 = analytic_energy(v, table.u).E0
        gap = abs(table.q - e0)
        t = table.w / math.sqrt(2 * gap) if gap > 1e-9 else float("inf")
        if t <= cap:
            semi_x.append(v)
            semi_y.append(t)
        else:
            semi_x.append(v)
            semi_y.append(float("nan"))
    fig_a.add_series(semi_x, semi_y, label="semiclassical", dash="2,3")
    fig_a.add_vline(velocity_at_energy(0.0))
    fig_a.add_vline(velocity_at_energy(table.q))
    fig_a.write(outdir / "fig2a.svg")

    fig_b = LineChart(
        title="Initial energy and tunneling probability",
        xlabel="v",
        ylabel="E0",
        ylabel_right="transmission",
    )
    fig_b.add_series(vs, [r.E0 for r in ok], label="E0")
    fig_b.add_series(vs, [r.transmission for r in ok], label="transmission", markers=True, axis="right")
    fig_b.add_vline(velocity_at_energy(0.0))
    fig_b.add_vline(velocity_at_energy(table.q))
    fig_b.write(outdir / "fig2b.svg")


def _cmd_sweep_velocity(args) -> int:
    kw = _scenario_kwargs(args, need_v=False)
    q = kw.pop("q", 2.0)
    w = kw.pop("w", 1.0)
    u = kw.pop("u", 2.0)
    v_list = _frange(args.v_from, args.v_to, args.v_step)
    table = experiments.velocity_sweep(q, w, u, v_list, workers=_workers(args), **kw)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        outdir / "sweep.csv",
        ["v", "E0", "dt_tunnel", "transmission", "t_classical", "t_semiclassical", "regime", "status"],
        [
            (r.v, r.E0, r.dt_tunnel, r.transmission, r.t_classical, r.t_semiclassical, r.regime, r.status)
            for r in table.rows
        ],
    )
    _write_json(outdir / "sweep.json", table)
    if args.plot:
        _plot_fig2(table, outdir)
    failed = sum(1 for r in table.rows if r.status != "ok")
    print(f"{len(table.rows)} rows written to {outdir / 'sweep.csv'} ({failed} gaps)")
    return 0


def _cmd_find_max(args) -> int:
    kw = _scenario_kwargs(args, need_v=False)
    q = kw.pop("q", 2.0)
    w = kw.pop("w", 1.0)
    u = kw.pop("u", 2.0)
    prof = units.species(kw.pop("species", "Rb87"))
    res = experiments.find_max_tunneling_time(q, w, u, workers=_workers(args), **kw)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = _jsonify(res)
    payload["dt_max_si_ms"] = units.to_si(res.dt_max, "time", prof) * 1e3
    payload["v_m_si_mm_per_s"] = units.to_si(res.v_m, "velocity", prof) * 1e3
    _write_json(outdir / "result.json", payload)
    print(
        f"v_m={res.v_m:.4f} dt_max={res.dt_max:.4f} "
        f"({payload['dt_max_si_ms']:.4f} ms for {prof.name}, {res.evaluations} runs)"
    )
    return 0


def _cmd_sweep_width(args) -> int:
    kw = _scenario_kwargs(args, need_v=False)
    q = kw.pop("q", 2.0)
    kw.pop("w", None)
    u = kw.pop("u", 2.0)
    species_name = kw.pop("species", "Rb87")
    workers = _workers(args)
    w_list = _frange(args.w_from, args.w_to, args.w_step)
    result = experiments.width_sweep(q, u, w_list, species_name, workers=workers, **kw)
    if args.refine_step:
        cache = {r.w: (r.dt_max, r.v_m) for r in result.ok_rows()}
        lo = max(args.w_from, result.w_c - args.refine_span)
        hi = min(args.w_to, result.w_c + args.refine_span)
        refined = sorted(set(w_list) | set(_frange(lo, hi, args.refine_step)))
        result = experiments.width_sweep(q, u, refined, species_name, workers=workers, cache=cache, **kw)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        outdir / "sweep.csv",
        ["w", "dt_max", "v_m", "energy_time", "momentum_space", "status"],
        [(r.w, r.dt_max, r.v_m, r.energy_time, r.momentum_space, r.status) for r in result.rows],
    )
    _write_json(outdir / "result.json", result)
    if args.plot:
        prof = units.species(species_name)
        ok = result.ok_rows()
        fig = LineChart(
            title="Maximum tunneling time and its velocity vs barrier width",
            xlabel="w [um]",
            ylabel="dt_max [ms]",
            ylabel_right="v_m [mm/s]",
        )
        ms = prof.time_unit * 1e3
        mms = prof.velocity_unit * 1e3
        fig.add_series([r.w for r in ok], [r.dt_max * ms for r in ok], label="dt_max", markers=True)
        fig.add_series([r.w for r in ok], [r.v_m * mms for r in ok], label="v_m", markers=True, axis="right")
        fig.add_vline(result.w_c)
        fig.write(outdir / "fig3.svg")
    print(
        f"w_c={result.w_c:.4f} um, below: {result.below_fit.coefficients}, "
        f"above: {result.above_fit.coefficients} (ms vs um)"
    )
    return 0


def _cmd_fit(args) -> int:
    points = []
    with open(args.input, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row.get("status", "ok") != "ok" or not row.get("dt_tunnel"):
                continue
            v = float(row["v"])
            if args.v_min is not None and v < args.v_min:
                continue
            if args.v_max is not None and v > args.v_max:
                continue
            points.append((v, float(row["dt_tunnel"])))
    kw = _scenario_kwargs(args, need_v=False)
    u = kw.get("u", 2.0)
    q = kw.get("q", 2.0)
    if args.v_min is None and args.v_max is None:
        points = _guarded_regime_window(points, args.law, q, u)
    if args.law == "log":
        fit = experiments.fit_log_law(points, u=u)
    else:
        fit = experiments.fit_linear_law(points, q=q, u=u)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "fit.json", fit)
    slope, intercept = fit.coefficients
    print(f"{fit.model}: slope={slope:.6f} intercept={intercept:.6f} rms={fit.residual_rms:.3e}")
    return 0


def _guarded_regime_window(points, law: str, q: float, u: float):
    """Clip auto-selected fit points a guard band away from regime boundaries."""
    guard = experiments.REGIME_GUARD_BAND
    v0 = velocity_at_energy(0.0)
    vq = velocity_at_energy(q)
    if law == "log":
        return [(v, t) for v, t in points if v <= v0 - guard]
    return [(v, t) for v, t in points if v0 + guard <= v <= vq - guard]


def _cmd_convert(args) -> int:
    prof = units.species(args.species)
    if args.inverse:
        out = units.from_si(args.value, args.kind, prof)
        print(f"{out!r} (dimensionless {args.kind}, {prof.name})")
        return 0
    out = units.to_si(args.value, args.kind, prof)
    scale, suffix = {"time": (1e3, "ms"), "velocity": (1e3, "mm/s"), "length": (1e6, "um")}[args.kind]
    print(f"{out * scale!r} {suffix} ({out!r} SI, {prof.name})")
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_scenario_flags(p: _Parser) -> None:
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--outdir", default=".", help="output directory (default: .)")
    p.add_argument("--workers", type=int, default=None, help="parallel sweep workers (env TUNNELCLOCK_WORKERS, default: cpu count)")
    p.add_argument("--q", type=float, default=None, help="barrier height (default 2)")
    p.add_argument("--w", type=float, default=None, help="barrier width (default 1)")
    p.add_argument("--u", type=float, default=None, help="interaction strength (default 2)")
    p.add_argument("--x0", type=float, default=None, help="initial packet center (default -15)")
    p.add_argument("--v", type=float, default=None, help="incident velocity")
    p.add_argument("--x-min", dest="x_min", type=float, default=None, help="domain lower edge (default -60)")
    p.add_argument("--x-max", dest="x_max", type=float, default=None, help="domain upper edge (default 60)")
    p.add_argument("--n", type=int, default=None, help="grid points, power of two (default 4096)")
    p.add_argument("--dt", type=float, default=None, help="time step (default 1e-3)")
    p.add_argument("--sample-every", dest="sample_every", type=int, default=None, help="observer cadence in steps (default 10)")
    p.add_argument("--t-final-cap", dest="t_final_cap", type=float, default=None, help="hard cap on propagation time (default 200)")
    p.add_argument("--species", default=None, help="species for SI conversion (Li7 or Rb87, default Rb87)")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="tunnelclock",
        description="Bright-soliton tunneling-time simulations and sweeps.",
        epilog=_COLUMN_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one collision: result.json + boundary_record.csv")
    _add_scenario_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep-velocity", help="tunneling time vs incident velocity")
    _add_scenario_flags(p)
    p.add_argument("--v-from", type=float, required=True)
    p.add_argument("--v-to", type=float, required=True)
    p.add_argument("--v-step", type=float, default=0.05)
    p.add_argument("--plot", action="store_true", help="write fig2a.svg and fig2b.svg")
    p.set_defaults(func=_cmd_sweep_velocity)

    p = sub.add_parser("find-max", help="maximum tunneling time over velocity")
    _add_scenario_flags(p)
    p.set_defaults(func=_cmd_find_max)

    p = sub.add_parser("sweep-width", help="maximum tunneling time vs barrier width")
    _add_scenario_flags(p)
    p.add_argument("--w-from", type=float, default=0.4)
    p.add_argument("--w-to", type=float, default=1.6)
    p.add_argument("--w-step", type=float, default=0.1)
    p.add_argument("--refine-step", type=float, default=0.025, help="extra resolution near the critical width (0 disables)")
    p.add_argument("--refine-span", type=float, default=0.15, help="half-width of the refinement window")
    p.add_argument("--plot", action="store_true", help="write fig3.svg")
    p.set_defaults(func=_cmd_sweep_width)

    p = sub.add_parser("fit", help="regime-law fit over a velocity sweep CSV")
    _add_scenario_flags(p)
    p.add_argument("--input", required=True, help="sweep.csv from sweep-velocity")
    p.add_argument("--law", choices=["log", "linear"], required=True)
    p.add_argument("--v-min", type=float, default=None)
    p.add_argument("--v-max", type=float, default=None)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("convert", help="dimensionless <-> SI conversion")
    p.add_argument("--value", type=float, required=True)
    p.add_argument("--kind", choices=list(units.KINDS), required=True)
    p.add_argument("--species", default="Rb87")
    p.add_argument("--inverse", action="store_true", help="convert from SI to dimensionless")
    p.set_defaults(func=_cmd_convert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except TunnelclockError as err:
        print(f"numerics failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
