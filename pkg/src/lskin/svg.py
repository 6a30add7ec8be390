"""Minimal SVG line/scatter rendering of scenario CSV files.

Deliberately small: axes box, tick labels, polylines or dot markers and a
legend, written without any plotting dependency.  Figures are for
eyeballing sweeps and trajectories; all quantitative checks read the CSV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .errors import ConfigError

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 20, 50


@dataclass(frozen=True)
class PlotSpec:
    x: str
    ys: tuple[str, ...]
    mode: str = "line"  # "line" | "scatter"
    logx: bool = False
    title: str = ""


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise ConfigError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def _finite(values):
    return [v for v in values if math.isfinite(v)]


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def render_svg(csv_path: str, plot: PlotSpec, out_path: str) -> None:
    header, raw = read_csv(csv_path)
    for col in (plot.x, *plot.ys):
        if col not in header:
            raise ConfigError(f"column {col!r} missing from {csv_path}")
    ix = header.index(plot.x)
    iys = [header.index(c) for c in plot.ys]

    xs, series = [], [[] for _ in iys]
    for row in raw:
        try:
            x = float(row[ix])
        except ValueError:
            continue
        if plot.logx:
            if x <= 0:
                continue
            x = math.log10(x)
        xs.append(x)
        for k, iy in enumerate(iys):
            try:
                series[k].append(float(row[iy]))
            except ValueError:
                series[k].append(math.nan)
    if not xs:
        raise ConfigError(f"{csv_path}: no plottable rows")

    all_y = _finite([v for s in series for v in s])
    if not all_y:
        raise ConfigError(f"{csv_path}: no finite values in {plot.ys}")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH - MARGIN_L - MARGIN_R}" '
        f'height="{HEIGHT - MARGIN_T - MARGIN_B}" fill="none" stroke="black"/>',
    ]
    for xt in _ticks(x_lo, x_hi):
        label = f"1e{xt:.2g}" if plot.logx else f"{xt:.4g}"
        parts.append(f'<line x1="{px(xt):.1f}" y1="{HEIGHT - MARGIN_B}" '
                     f'x2="{px(xt):.1f}" y2="{HEIGHT - MARGIN_B + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(xt):.1f}" y="{HEIGHT - MARGIN_B + 20}" '
                     f'font-size="11" text-anchor="middle">{label}</text>')
    for yt in _ticks(y_lo, y_hi):
        parts.append(f'<line x1="{MARGIN_L - 5}" y1="{py(yt):.1f}" '
                     f'x2="{MARGIN_L}" y2="{py(yt):.1f}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{py(yt) + 4:.1f}" '
                     f'font-size="11" text-anchor="end">{yt:.4g}</text>')
    parts.append(f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2}" y="{HEIGHT - 12}" '
                 f'font-size="12" text-anchor="middle">'
                 f'{plot.x}{" (log10)" if plot.logx else ""}</text>')
    if plot.title:
        parts.append(f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2}" y="{MARGIN_T - 6}" '
                     f'font-size="13" text-anchor="middle">{plot.title}</text>')

    for k, ys in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(xs, ys) if math.isfinite(y)]
        if plot.mode == "scatter":
            for (cx, cy) in pts:
                parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="1.8" fill="{color}"/>')
        else:
            if len(pts) > 1:
                path = " ".join(f"{cx:.1f},{cy:.1f}" for cx, cy in pts)
                parts.append(f'<polyline points="{path}" fill="none" '
                             f'stroke="{color}" stroke-width="1.4"/>')
            for (cx, cy) in pts[:1] + pts[-1:]:
                parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="1.5" fill="{color}"/>')
        lx, ly = WIDTH - MARGIN_R - 130, MARGIN_T + 16 + 16 * k
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" font-size="11">{plot.ys[k]}</text>')

    parts.append("</svg>")
    with open(out_path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def default_plot(scenario: str, columns: list[str], *,
                 log_times: bool = False) -> PlotSpec | None:
    """Per-scenario default figure; None when nothing sensible exists."""
    if scenario == "spectrum" and columns[0] not in ("boundary",):
        return PlotSpec(x=columns[0], ys=("re_beta",), mode="scatter",
                        title="rapidity real parts")
    if scenario == "gap" and columns[0] == "delta_obc":
        return None
    if scenario == "gap":
        return PlotSpec(x=columns[0], ys=("delta_obc", "delta_pbc", "delta_numeric"),
                        title="spectral gaps")
    if scenario == "topology" and columns[0] not in ("nu",):
        return PlotSpec(x=columns[0], ys=("nu", "abs_r2"), title="winding and skin")
    if scenario == "steady" and columns[0] not in ("n_ss",):
        return PlotSpec(x=columns[0], ys=("j_ss",), title="stationary current")
    if scenario == "evolve":
        return PlotSpec(x="t", ys=("j_c",), logx=log_times, title="current relaxation")
    if scenario == "lifetime":
        return PlotSpec(x="L", ys=("tau",), title="edge-mode lifetime")
    if scenario == "sweep":
        return PlotSpec(x=columns[0], ys=("delta_numeric",), title="gap sweep")
    return None
