"""Plot and table emission.

Plots are written as self-contained SVG with a machine-readable JSON block in
a <metadata> element, so downstream checks can parse exact series values back
out of the artifact; no external rendering libraries are involved. Axes
follow the sweep figures: shots on a log-scaled x axis, mean relative error
with standard-error bars on a linear y axis, one line per sparsity level.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

_WIDTH = 760
_HEIGHT = 480
_MARGIN_L = 80
_MARGIN_R = 190
_MARGIN_T = 50
_MARGIN_B = 60

_COLORS = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)


@dataclass(frozen=True)
class AxesSpec:
    """Shared data ranges; pass the same spec to plots meant to be compared."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    x_log: bool = True
    x_label: str = "shots"
    y_label: str = "relative error"


def axes_for_groups(groups: list[list[dict]], y_field: str, sem_field: str) -> AxesSpec:
    """Axes covering every group, so related plots are directly comparable."""
    xs = [int(r["shots"]) for g in groups for r in g]
    ys = [float(r[y_field]) + float(r[sem_field]) for g in groups for r in g]
    if not xs:
        raise ValueError("no data to derive axes from")
    return AxesSpec(
        x_min=min(xs), x_max=max(xs), y_min=0.0, y_max=max(ys) * 1.05 or 1.0
    )


def _x_pos(x: float, axes: AxesSpec) -> float:
    if axes.x_log:
        lo, hi = math.log10(axes.x_min), math.log10(axes.x_max)
        frac = (math.log10(x) - lo) / (hi - lo) if hi > lo else 0.5
    else:
        frac = (
            (x - axes.x_min) / (axes.x_max - axes.x_min)
            if axes.x_max > axes.x_min
            else 0.5
        )
    return _MARGIN_L + frac * (_WIDTH - _MARGIN_L - _MARGIN_R)


def _y_pos(y: float, axes: AxesSpec) -> float:
    span = axes.y_max - axes.y_min
    frac = (y - axes.y_min) / span if span > 0 else 0.5
    return _HEIGHT - _MARGIN_B - frac * (_HEIGHT - _MARGIN_T - _MARGIN_B)


def emit_plot(
    agg_rows: list[dict],
    axes: AxesSpec,
    path: str,
    title: str,
    y_field: str = "mean_relative_error",
    sem_field: str = "sem_relative_error",
) -> str:
    """Write one SVG: a line per sparsity level over the shot grid.

    Empty series are dropped with a warning; single-point series draw a
    marker without a connecting line.
    """
    series: dict[float, list[dict]] = {}
    for row in agg_rows:
        series.setdefault(float(row["sparsity_level"]), []).append(row)
    levels = sorted(series)
    kept: dict[float, list[tuple[float, float, float]]] = {}
    for level in levels:
        pts = []
        for r in series[level]:
            y = r.get(y_field)
            if y is None or math.isnan(float(y)):
                continue
            pts.append((int(r["shots"]), float(y), float(r[sem_field])))
        pts.sort(key=lambda p: p[0])
        if not pts:
            warnings.warn(f"empty series for sparsity {level}; dropped")
            continue
        kept[level] = pts
    if not kept:
        raise ValueError("no non-empty series to plot")

    meta = {
        "title": title,
        "x_label": axes.x_label,
        "y_label": axes.y_label,
        "x_log": axes.x_log,
        "axes": [axes.x_min, axes.x_max, axes.y_min, axes.y_max],
        "series": [
            {
                "sparsity": level,
                "shots": [p[0] for p in pts],
                y_field: [p[1] for p in pts],
                sem_field: [p[2] for p in pts],
            }
            for level, pts in kept.items()
        ],
    }

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f"<metadata id=\"qrwalk-data\">{json.dumps(meta)}</metadata>",
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]
    # frame
    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R
    y0, y1 = _HEIGHT - _MARGIN_B, _MARGIN_T
    parts.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    # x ticks at the distinct shot counts
    tick_shots = sorted({p[0] for pts in kept.values() for p in pts})
    for s in tick_shots:
        px = _x_pos(s, axes)
        parts.append(
            f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 5}" '
            f'stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{y0 + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{s}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.1f}" y="{_HEIGHT - 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{axes.x_label}'
        f'{" (log scale)" if axes.x_log else ""}</text>'
    )
    # y ticks
    for i in range(6):
        val = axes.y_min + (axes.y_max - axes.y_min) * i / 5
        py = _y_pos(val, axes)
        parts.append(
            f'<line x1="{x0 - 5}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" '
            f'stroke="black"/>'
        )
        parts.append(
            f'<text x="{x0 - 9}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{val:.3g}</text>'
        )
    parts.append(
        f'<text x="20" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {(y0 + y1) / 2:.1f})">{axes.y_label}</text>'
    )
    # series
    for idx, (level, pts) in enumerate(kept.items()):
        color = _COLORS[idx % len(_COLORS)]
        coords = [(_x_pos(p[0], axes), _y_pos(p[1], axes)) for p in pts]
        if len(coords) > 1:
            poly = " ".join(f"{px:.2f},{py:.2f}" for px, py in coords)
            parts.append(
                f'<polyline points="{poly}" fill="none" stroke="{color}" '
                f'stroke-width="1.5" class="series"/>'
            )
        for (px, py), p in zip(coords, pts):
            sem = p[2]
            if sem > 0:
                y_hi = _y_pos(min(p[1] + sem, axes.y_max), axes)
                y_lo = _y_pos(max(p[1] - sem, axes.y_min), axes)
                parts.append(
                    f'<line x1="{px:.2f}" y1="{y_hi:.2f}" x2="{px:.2f}" '
                    f'y2="{y_lo:.2f}" stroke="{color}" stroke-width="1"/>'
                )
                for ye in (y_hi, y_lo):
                    parts.append(
                        f'<line x1="{px - 3:.2f}" y1="{ye:.2f}" '
                        f'x2="{px + 3:.2f}" y2="{ye:.2f}" stroke="{color}" '
                        f'stroke-width="1"/>'
                    )
            parts.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}" '
                f'class="marker"/>'
            )
        # legend entry
        ly = _MARGIN_T + 14 + idx * 18
        lx = _WIDTH - _MARGIN_R + 12
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
            f'font-size="12">sparsity {level:g}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    return path


def read_plot_metadata(path: str) -> dict:
    """Parse the JSON data block back out of an emitted SVG."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    start = text.index('<metadata id="qrwalk-data">') + len(
        '<metadata id="qrwalk-data">'
    )
    end = text.index("</metadata>", start)
    return json.loads(text[start:end])


def emit_table1(
    agg_rows: list[dict],
    backend: str = "fake-casablanca",
    shots: int = 1008,
    n: int = 4,
) -> tuple[str, bool]:
    """Two-row percentage table over the sparsity levels, N=16 at 1008 shots.

    Returns (text, complete); missing cells render as '--' and mark the
    table incomplete.
    """
    cells: dict[tuple[str, float], float] = {}
    levels = set()
    for row in agg_rows:
        if (
            int(row["n"]) == n
            and int(row["shots"]) == shots
            and str(row["backend"]) == backend
        ):
            level = float(row["sparsity_level"])
            levels.add(level)
            cells[(str(row["mitigation"]), level)] = float(
                row["mean_relative_error"]
            )
    expected = [0.0, 0.5, 0.75, 0.875, 0.9375]
    columns = expected if not levels or levels <= set(expected) else sorted(levels)

    def _level_label(lv: float) -> str:
        if lv == 0:
            return "0 (dense)"
        return f"{lv:.2f}" if round(lv, 2) == lv else f"{lv:g}"

    header_cells = [_level_label(lv) for lv in columns]
    complete = True
    body = []
    for label, mode in (("Un-mitigated", "off"), ("Mitigated", "on")):
        vals = []
        for lv in columns:
            if (mode, lv) in cells:
                vals.append(f"{100.0 * cells[(mode, lv)]:.2f}")
            else:
                vals.append("--")
                complete = False
        body.append((label, vals))
    width = max(len(h) for h in header_cells + ["Matrix sparsity level"]) + 2
    colw = max(9, max(len(h) for h in header_cells) + 2)
    lines = [
        f"Relative error (%), N={1 << n}, {shots} shots, {backend}",
        "Matrix sparsity level".ljust(width)
        + "".join(h.rjust(colw) for h in header_cells),
    ]
    for label, vals in body:
        lines.append(label.ljust(width) + "".join(v.rjust(colw) for v in vals))
    return "\n".join(lines) + "\n", complete
