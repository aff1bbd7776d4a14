"""Deterministic SVG chart of mean parallel rounds versus population size.

No plotting library: the chart is a few hundred SVG elements emitted with
fixed formatting, so identical input data always yields identical bytes.
Axes are log2 in n and log10 in parallel rounds; one series per
(dynamics, init) pair, solid for uniform inits and dashed for adversarial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .experiments import ExperimentTable

__all__ = ["Series", "collect_series", "render_svg", "write_svg"]

WIDTH, HEIGHT = 640.0, 440.0
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70.0, 24.0, 24.0, 56.0

# (color, marker) per dynamics family; extras cycle through the fallbacks
_VOTER_STYLE = ("#e07b28", "triangle")
_TREND_STYLE = ("#2a6fb5", "circle")
_FALLBACK_COLORS = ("#3a9e4e", "#c43d3d", "#8757b0", "#7a6652")
_DASH = "7 5"


@dataclass(frozen=True)
class Series:
    dynamics: str
    init: str
    points: tuple[tuple[int, float], ...]  # (n, mean parallel rounds), n ascending

    @property
    def name(self) -> str:
        return f"{self.dynamics} {self.init}"


def collect_series(table: ExperimentTable) -> list[Series]:
    """Mean parallel rounds per cell, grouped into one series per
    (dynamics, init), ordered deterministically."""
    cells: dict[tuple[str, str], dict[int, list[float]]] = {}
    for row in table.rows:
        cells.setdefault((row.dynamics, row.init), {}).setdefault(row.n, []).append(
            row.parallel_rounds
        )
    init_rank = {"uniform": 0, "adversarial": 1}
    keys = sorted(cells, key=lambda k: (k[0], init_rank.get(k[1], 2), k[1]))
    series = []
    for dynamics, init in keys:
        by_n = cells[(dynamics, init)]
        points = tuple(
            (n, sum(values) / len(values)) for n, values in sorted(by_n.items())
        )
        series.append(Series(dynamics, init, points))
    return series


def _style_for(dynamics: str, fallback_index: int) -> tuple[str, str]:
    family = dynamics.split(":", 1)[0]
    if family == "voter":
        return _VOTER_STYLE
    if family == "trend":
        return _TREND_STYLE
    color = _FALLBACK_COLORS[fallback_index % len(_FALLBACK_COLORS)]
    return color, "square"


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _marker(shape: str, x: float, y: float, color: str) -> str:
    if shape == "circle":
        return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.5" fill="{color}"/>'
    if shape == "triangle":
        pts = f"{_fmt(x)},{_fmt(y - 4.5)} {_fmt(x - 4)},{_fmt(y + 3.5)} {_fmt(x + 4)},{_fmt(y + 3.5)}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    return (
        f'<rect x="{_fmt(x - 3.2)}" y="{_fmt(y - 3.2)}" width="6.4" height="6.4" '
        f'fill="{color}"/>'
    )


def _axis_ranges(series: list[Series]) -> tuple[float, float, float, float]:
    xs = [n for s in series for n, _ in s.points]
    ys = [v for s in series for _, v in s.points if v > 0.0]
    if xs:
        x_lo, x_hi = math.log2(min(xs)), math.log2(max(xs))
    else:
        x_lo, x_hi = 3.0, 10.0
    if x_hi - x_lo < 1e-9:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if ys:
        y_lo = math.floor(math.log10(min(ys)))
        y_hi = math.ceil(math.log10(max(ys)))
    else:
        y_lo, y_hi = 0.0, 3.0
    if y_hi - y_lo < 1e-9:
        y_hi = y_lo + 1.0
    return x_lo, x_hi, float(y_lo), float(y_hi)


def render_svg(table: ExperimentTable) -> str:
    """The full chart as an SVG document string."""
    series = collect_series(table)
    x_lo, x_hi, y_lo, y_hi = _axis_ranges(series)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(n: float) -> float:
        return MARGIN_LEFT + (math.log2(n) - x_lo) / (x_hi - x_lo) * plot_w

    def py(value: float) -> float:
        v = math.log10(value) if value > 0.0 else y_lo
        v = min(max(v, y_lo), y_hi)
        return MARGIN_TOP + (y_hi - v) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:g}" '
        f'height="{HEIGHT:g}" viewBox="0 0 {WIDTH:g} {HEIGHT:g}">',
        f'<rect width="{WIDTH:g}" height="{HEIGHT:g}" fill="#ffffff"/>',
    ]
    bottom = MARGIN_TOP + plot_h
    right = MARGIN_LEFT + plot_w

    # x ticks at every distinct n present (or the range endpoints if empty)
    tick_ns = sorted({n for s in series for n, _ in s.points}) or [
        2 ** int(round(x_lo)),
        2 ** int(round(x_hi)),
    ]
    for n in tick_ns:
        x = px(n)
        out.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(MARGIN_TOP)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(bottom)}" stroke="#e3e3e3" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(x)}" y="{_fmt(bottom + 16)}" font-size="9" '
            f'text-anchor="middle" font-family="sans-serif">{n}</text>'
        )
    # y ticks at integer powers of ten
    k = int(y_lo)
    while k <= int(y_hi):
        y = py(10.0**k)
        label = str(10**k) if 0 <= k <= 4 else f"1e{k}"
        out.append(
            f'<line x1="{_fmt(MARGIN_LEFT)}" y1="{_fmt(y)}" x2="{_fmt(right)}" '
            f'y2="{_fmt(y)}" stroke="#e3e3e3" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(MARGIN_LEFT - 8)}" y="{_fmt(y + 3)}" font-size="10" '
            f'text-anchor="end" font-family="sans-serif">{label}</text>'
        )
        k += 1
    # frame and axis titles
    out.append(
        f'<rect x="{_fmt(MARGIN_LEFT)}" y="{_fmt(MARGIN_TOP)}" '
        f'width="{_fmt(plot_w)}" height="{_fmt(plot_h)}" fill="none" '
        f'stroke="#444444" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{_fmt(MARGIN_LEFT + plot_w / 2)}" y="{_fmt(HEIGHT - 12)}" '
        f'font-size="12" text-anchor="middle" font-family="sans-serif">'
        f"population size n (log scale)</text>"
    )
    out.append(
        f'<text x="16" y="{_fmt(MARGIN_TOP + plot_h / 2)}" font-size="12" '
        f'text-anchor="middle" font-family="sans-serif" '
        f'transform="rotate(-90 16 {_fmt(MARGIN_TOP + plot_h / 2)})">'
        f"mean parallel rounds (log scale)</text>"
    )

    fallback_index = 0
    legend_entries = []
    for s in series:
        color, shape = _style_for(s.dynamics, fallback_index)
        if (color, shape) not in (_VOTER_STYLE, _TREND_STYLE):
            fallback_index += 1
        dash = f' stroke-dasharray="{_DASH}"' if s.init == "adversarial" else ""
        if len(s.points) > 1:
            coords = " ".join(f"{_fmt(px(n))},{_fmt(py(v))}" for n, v in s.points)
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="1.8"{dash}/>'
            )
        for n, v in s.points:
            out.append(_marker(shape, px(n), py(v), color))
        legend_entries.append((s.name, color, shape, dash))

    for idx, (name, color, shape, dash) in enumerate(legend_entries):
        y = MARGIN_TOP + 14 + 16 * idx
        x0 = MARGIN_LEFT + 12
        out.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y)}" x2="{_fmt(x0 + 26)}" '
            f'y2="{_fmt(y)}" stroke="{color}" stroke-width="1.8"{dash}/>'
        )
        out.append(_marker(shape, x0 + 13, y, color))
        out.append(
            f'<text x="{_fmt(x0 + 32)}" y="{_fmt(y + 3.5)}" font-size="10" '
            f'font-family="sans-serif">{name}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(table: ExperimentTable, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_svg(table))
