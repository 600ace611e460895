"""Minimal self-contained SVG line charts (no external assets, no deps).

Supports a left and an optional right y-axis, line/marker series, vertical
reference lines, and a simple legend. Output is deterministic text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["LineChart"]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo, hi]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e6:
        return str(int(v))
    return f"{v:.4g}"


@dataclass
class _Series:
    x: list[float]
    y: list[float]
    label: str | None
    color: str
    dash: str | None
    markers: bool
    line: bool
    axis: str


@dataclass
class LineChart:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    ylabel_right: str | None = None
    width: int = 720
    height: int = 480
    _series: list[_Series] = field(default_factory=list)
    _vlines: list[tuple[float, str | None]] = field(default_factory=list)

    def add_series(
        self,
        x,
        y,
        label: str | None = None,
        color: str | None = None,
        dash: str | None = None,
        markers: bool = False,
        line: bool = True,
        axis: str = "left",
    ) -> None:
        pts = [(float(a), float(b)) for a, b in zip(x, y) if b is not None and math.isfinite(float(b))]
        if not pts:
            return
        if color is None:
            color = _PALETTE[len(self._series) % len(_PALETTE)]
        self._series.append(
            _Series(
                x=[p[0] for p in pts],
                y=[p[1] for p in pts],
                label=label,
                color=color,
                dash=dash,
                markers=markers,
                line=line,
                axis=axis,
            )
        )

    def add_vline(self, x: float, label: str | None = None) -> None:
        self._vlines.append((float(x), label))

    def _axis_range(self, axis: str) -> tuple[float, float]:
        ys = [v for s in self._series if s.axis == axis for v in s.y]
        if not ys:
            return (0.0, 1.0)
        lo, hi = min(ys), max(ys)
        pad = 0.05 * (hi - lo) if hi > lo else max(abs(hi), 1.0) * 0.1
        return lo - pad, hi + pad

    def render(self) -> str:
        ml, mr, mt, mb = 64, 64 if self.ylabel_right else 24, 40, 48
        pw, ph = self.width - ml - mr, self.height - mt - mb
        xs = [v for s in self._series for v in s.x] + [x for x, _ in self._vlines]
        if not xs:
            xs = [0.0, 1.0]
        x_lo, x_hi = min(xs), max(xs)
        if x_hi <= x_lo:
            x_hi = x_lo + 1.0
        x_pad = 0.03 * (x_hi - x_lo)
        x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
        y_ranges = {"left": self._axis_range("left")}
        if self.ylabel_right is not None:
            y_ranges["right"] = self._axis_range("right")

        def px(v: float) -> float:
            return ml + (v - x_lo) / (x_hi - x_lo) * pw

        def py(v: float, axis: str) -> float:
            lo, hi = y_ranges[axis]
            return mt + ph - (v - lo) / (hi - lo) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="12">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
        ]
        if self.title:
            out.append(
                f'<text x="{self.width / 2}" y="{mt - 16}" text-anchor="middle" font-size="14">{self.title}</text>'
            )
        for t in _nice_ticks(x_lo, x_hi):
            if t < x_lo or t > x_hi:
                continue
            out.append(f'<line x1="{px(t):.1f}" y1="{mt + ph}" x2="{px(t):.1f}" y2="{mt + ph + 4}" stroke="#333"/>')
            out.append(f'<text x="{px(t):.1f}" y="{mt + ph + 16}" text-anchor="middle">{_fmt(t)}</text>')
        for axis, anchor_x, label in (("left", ml, self.ylabel), ("right", ml + pw, self.ylabel_right)):
            if axis == "right" and self.ylabel_right is None:
                continue
            lo, hi = y_ranges[axis]
            sign = -1 if axis == "left" else 1
            for t in _nice_ticks(lo, hi):
                if t < lo or t > hi:
                    continue
                y = py(t, axis)
                out.append(
                    f'<line x1="{anchor_x}" y1="{y:.1f}" x2="{anchor_x + sign * 4}" y2="{y:.1f}" stroke="#333"/>'
                )
                ta = "end" if axis == "left" else "start"
                out.append(f'<text x="{anchor_x + sign * 8}" y="{y + 4:.1f}" text-anchor="{ta}">{_fmt(t)}</text>')
            if label:
                lx = anchor_x - 44 if axis == "left" else anchor_x + 48
                out.append(
                    f'<text x="{lx}" y="{mt + ph / 2}" text-anchor="middle" '
                    f'transform="rotate(-90 {lx} {mt + ph / 2})">{label}</text>'
                )
        if self.xlabel:
            out.append(
                f'<text x="{ml + pw / 2}" y="{self.height - 12}" text-anchor="middle">{self.xlabel}</text>'
            )
        for x, _ in self._vlines:
            out.append(
                f'<line x1="{px(x):.1f}" y1="{mt}" x2="{px(x):.1f}" y2="{mt + ph}" '
                f'stroke="#888" stroke-dasharray="4,3"/>'
            )
        for s in self._series:
            pts = " ".join(f"{px(x):.2f},{py(y, s.axis):.2f}" for x, y in zip(s.x, s.y))
            if s.line and len(s.x) > 1:
                dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
                out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" stroke-width="1.5"{dash}/>')
            if s.markers:
                for x, y in zip(s.x, s.y):
                    out.append(f'<circle cx="{px(x):.2f}" cy="{py(y, s.axis):.2f}" r="3" fill="{s.color}"/>')
        legend_y = mt + 14
        for s in self._series:
            if not s.label:
                continue
            out.append(f'<line x1="{ml + 10}" y1="{legend_y - 4}" x2="{ml + 32}" y2="{legend_y - 4}" stroke="{s.color}" stroke-width="2"/>')
            out.append(f'<text x="{ml + 38}" y="{legend_y}">{s.label}</text>')
            legend_y += 16
        out.append("</svg>")
        return "\n".join(out)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
            fh.write("\n")
