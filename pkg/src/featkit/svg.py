"""Minimal, deterministic SVG emitters for the CLI plot artifacts.

Only rect/circle/line/path/text primitives, no timestamps, fixed float
formatting — two runs with the same inputs produce byte-identical files.
Rich interactivity belongs to the browser explorer, not here.
"""

from __future__ import annotations

import math

import numpy as np

# 8-stop approximation of a perceptually uniform sequential map
_SEQ_STOPS = [
    (68, 1, 84), (70, 50, 127), (54, 92, 141), (39, 127, 142),
    (31, 161, 135), (74, 194, 109), (159, 218, 58), (253, 231, 37),
]

# Okabe-Ito categorical palette (colorblind-safe)
CATEGORICAL = [
    "#0072B2", "#E69F00", "#009E73", "#CC79A7",
    "#56B4E9", "#D55E00", "#F0E442", "#000000",
]


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def seq_color(v: float) -> str:
    """Map v in [0,1] onto the sequential palette."""
    v = min(max(float(v), 0.0), 1.0)
    pos = v * (len(_SEQ_STOPS) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(_SEQ_STOPS) - 1)
    frac = pos - lo
    rgb = [round(a + (b - a) * frac) for a, b in zip(_SEQ_STOPS[lo], _SEQ_STOPS[hi])]
    return f"#{rgb[0]:02x}{rgb[1]:02x}{rgb[2]:02x}"


def group_color(index: int) -> str:
    return CATEGORICAL[index % len(CATEGORICAL)]


def _doc(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _text(x: float, y: float, s: str, size: int = 10, anchor: str = "start") -> str:
    safe = s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
        f'font-family="sans-serif" text-anchor="{anchor}">{safe}</text>'
    )


def heatmap_svg(
    values: np.ndarray,
    row_order: list[int],
    col_order: list[int],
    title: str = "",
    cell: float = 8.0,
    legend: bool = True,
) -> str:
    """Matrix heatmap with rows/columns drawn in the given orders."""
    values = np.asarray(values, dtype=float)
    n_rows, n_cols = values.shape
    margin, top = 10.0, 26.0
    width = margin * 2 + n_cols * cell + (60 if legend else 0)
    height = top + margin + n_rows * cell
    body = [_text(margin, 16, title, size=12)] if title else []
    lo = float(np.nanmin(values))
    hi = float(np.nanmax(values))
    span = hi - lo if hi > lo else 1.0
    for r, i in enumerate(row_order):
        for c, j in enumerate(col_order):
            v = (values[i, j] - lo) / span
            body.append(
                f'<rect x="{_fmt(margin + c * cell)}" y="{_fmt(top + r * cell)}" '
                f'width="{_fmt(cell)}" height="{_fmt(cell)}" fill="{seq_color(v)}"/>'
            )
    if legend:
        x0 = margin + n_cols * cell + 12
        for k in range(32):
            body.append(
                f'<rect x="{_fmt(x0)}" y="{_fmt(top + k * 3)}" width="14" height="3" '
                f'fill="{seq_color(1.0 - k / 31)}"/>'
            )
        body.append(_text(x0 + 18, top + 8, _fmt(hi), size=8))
        body.append(_text(x0 + 18, top + 96, _fmt(lo), size=8))
    return _doc(width, height, body)


def scatter_svg(
    coords: np.ndarray,
    groups: list[str] | None,
    ellipses: list[dict] | None = None,
    title: str = "",
    axis_labels: tuple[str, str] | None = None,
    size: float = 420.0,
) -> str:
    """Embedding scatter, colored by group, with optional 95% ellipses."""
    coords = np.asarray(coords, dtype=float)
    pad, top = 46.0, 30.0
    span_x = float(coords[:, 0].max() - coords[:, 0].min()) or 1.0
    span_y = float(coords[:, 1].max() - coords[:, 1].min()) or 1.0

    def sx(v: float) -> float:
        return pad + (v - coords[:, 0].min()) / span_x * (size - 2 * pad)

    def sy(v: float) -> float:
        return top + (size - top - pad) * (1.0 - (v - coords[:, 1].min()) / span_y)

    body = [_text(pad, 18, title, size=12)] if title else []
    palette: dict[str, str] = {}
    if groups is not None:
        for k, g in enumerate(sorted(set(groups))):
            palette[g] = group_color(k)

    if ellipses:
        chi2_95 = 5.991464547107979  # 95% quantile of chi-square with 2 df
        for e in ellipses:
            cov = np.array(e["cov"], dtype=float)
            if e["n"] < 3 or float(np.trace(cov)) <= 0:
                continue
            eigvals, eigvecs = np.linalg.eigh(cov)
            angle = math.degrees(math.atan2(eigvecs[1, 1], eigvecs[0, 1]))
            rx = math.sqrt(max(eigvals[1], 0.0) * chi2_95) / span_x * (size - 2 * pad)
            ry = math.sqrt(max(eigvals[0], 0.0) * chi2_95) / span_y * (size - top - pad)
            cx, cy = sx(e["mean"][0]), sy(e["mean"][1])
            color = palette.get(e["group"], "#888888")
            body.append(
                f'<ellipse cx="{_fmt(cx)}" cy="{_fmt(cy)}" rx="{_fmt(rx)}" ry="{_fmt(ry)}" '
                f'fill="none" stroke="{color}" stroke-dasharray="4 3" '
                f'transform="rotate({_fmt(-angle)} {_fmt(cx)} {_fmt(cy)})"/>'
            )

    for i, (x, y) in enumerate(coords):
        color = palette.get(groups[i], "#333333") if groups is not None else "#333333"
        body.append(
            f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" fill="{color}" '
            f'fill-opacity="0.8"/>'
        )

    if axis_labels:
        body.append(_text(size / 2, size - 6, axis_labels[0], anchor="middle"))
        body.append(_text(12, size / 2, axis_labels[1], anchor="middle"))
    for k, (g, color) in enumerate(sorted(palette.items())):
        y = top + 14 * k
        body.append(f'<circle cx="{_fmt(size - 90)}" cy="{_fmt(y)}" r="4" fill="{color}"/>')
        body.append(_text(size - 82, y + 4, g, size=9))
    return _doc(size, size, body)


def quality_bars_svg(report_dict: dict, title: str = "Extraction quality") -> str:
    """Stacked proportion bars (numeric / NaN / +Inf / -Inf) per feature."""
    rows = report_dict["features"]
    bar_h, gap, left, top = 12.0, 3.0, 180.0, 30.0
    width = left + 320
    height = top + len(rows) * (bar_h + gap) + 30
    colors = {"numeric": "#0072B2", "nan": "#D55E00", "pos_inf": "#E69F00", "neg_inf": "#CC79A7"}
    body = [_text(10, 18, title, size=12)]
    for k, row in enumerate(rows):
        y = top + k * (bar_h + gap)
        body.append(_text(left - 6, y + bar_h - 2, row["name"], size=9, anchor="end"))
        x = left
        for key in ("numeric", "nan", "pos_inf", "neg_inf"):
            w = row[key] * 300.0
            if w > 0:
                body.append(
                    f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
                    f'height="{_fmt(bar_h)}" fill="{colors[key]}"/>'
                )
            x += w
    legend_y = height - 12
    x = left
    for key, color in colors.items():
        body.append(f'<rect x="{_fmt(x)}" y="{_fmt(legend_y - 9)}" width="9" height="9" fill="{color}"/>')
        body.append(_text(x + 12, legend_y, key, size=9))
        x += 75
    return _doc(width, height, body)


def accuracy_bars_svg(report_dict: dict, title: str = "Classification by feature set") -> str:
    """Mean statistic per set with +-1 sd whiskers, counts in the labels."""
    rows = report_dict["rows"]
    bar_w, gap, left, top, plot_h = 56.0, 22.0, 60.0, 34.0, 240.0
    width = left + len(rows) * (bar_w + gap) + 30
    height = top + plot_h + 64
    body = [_text(10, 18, title, size=12)]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = top + plot_h * (1 - frac)
        body.append(
            f'<line x1="{_fmt(left - 4)}" y1="{_fmt(y)}" x2="{_fmt(width - 20)}" '
            f'y2="{_fmt(y)}" stroke="#dddddd"/>'
        )
        body.append(_text(left - 8, y + 3, _fmt(frac), size=8, anchor="end"))
    for k, row in enumerate(rows):
        x = left + k * (bar_w + gap)
        mean, sd = row["mean"], row["sd"]
        y_mean = top + plot_h * (1 - mean)
        body.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y_mean)}" width="{_fmt(bar_w)}" '
            f'height="{_fmt(top + plot_h - y_mean)}" fill="{group_color(k)}" fill-opacity="0.75"/>'
        )
        y_lo = top + plot_h * (1 - max(mean - sd, 0.0))
        y_hi = top + plot_h * (1 - min(mean + sd, 1.0))
        cx = x + bar_w / 2
        body.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(y_lo)}" x2="{_fmt(cx)}" y2="{_fmt(y_hi)}" stroke="#222222"/>')
        label = f'{row["set"]} ({row["feature_count"]})'
        body.append(_text(cx, top + plot_h + 14, label, size=9, anchor="middle"))
        if "p_value" in row:
            body.append(_text(cx, top + plot_h + 28, f'p={row["p_value"]:.2g}', size=8, anchor="middle"))
    return _doc(width, height, body)


def violins_svg(violins: list[dict], title: str = "Top features") -> str:
    """Small-multiple violins: per-class mirrored densities plus raw points."""
    panel_w, panel_h, pad = 220.0, 150.0, 36.0
    per_row = 3
    n = len(violins)
    rows = (n + per_row - 1) // per_row
    width = pad + per_row * (panel_w + pad)
    height = pad + rows * (panel_h + pad) + 20
    body = [_text(10, 18, title, size=12)]
    for idx, violin in enumerate(violins):
        px = pad + (idx % per_row) * (panel_w + pad)
        py = pad + (idx // per_row) * (panel_h + pad) + 10
        body.append(_text(px, py - 4, violin["feature"], size=10))
        classes = violin["classes"]
        lane_w = panel_w / max(len(classes), 1)
        lo = min(min(c["density_x"]) for c in classes)
        hi = max(max(c["density_x"]) for c in classes)
        span = (hi - lo) or 1.0
        max_d = max(max(c["density_y"]) for c in classes) or 1.0
        for ci, cls in enumerate(classes):
            cx = px + lane_w * (ci + 0.5)
            color = group_color(ci)
            pts_right = [
                (cx + d / max_d * (lane_w * 0.42), py + panel_h * (1 - (v - lo) / span))
                for v, d in zip(cls["density_x"], cls["density_y"])
            ]
            pts_left = [(2 * cx - x, y) for x, y in pts_right]
            path = "M" + " L".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts_right + pts_left[::-1]) + " Z"
            body.append(f'<path d="{path}" fill="{color}" fill-opacity="0.35" stroke="{color}"/>')
            for v in cls["points"]:
                y = py + panel_h * (1 - (v - lo) / span)
                body.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(y)}" r="1.6" fill="{color}"/>')
            body.append(_text(cx, py + panel_h + 12, cls["group"], size=9, anchor="middle"))
    return _doc(width, height, body)


def correlation_svg(corr_dict: dict, title: str = "Top-feature correlations") -> str:
    """Clustered |rho| matrix with feature names along the left edge."""
    names = corr_dict["names"]
    order = corr_dict["order"]
    values = np.asarray(corr_dict["values"], dtype=float)
    cell = max(10.0, min(22.0, 420.0 / max(len(names), 1)))
    left, top = 170.0, 30.0
    width = left + len(names) * cell + 70
    height = top + len(names) * cell + 16
    body = [_text(10, 18, title, size=12)]
    for r, i in enumerate(order):
        body.append(_text(left - 5, top + r * cell + cell * 0.7, names[i], size=8, anchor="end"))
        for c, j in enumerate(order):
            body.append(
                f'<rect x="{_fmt(left + c * cell)}" y="{_fmt(top + r * cell)}" '
                f'width="{_fmt(cell)}" height="{_fmt(cell)}" fill="{seq_color(values[i, j])}"/>'
            )
    x0 = left + len(names) * cell + 10
    for k in range(32):
        body.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(top + k * 3)}" width="14" height="3" '
            f'fill="{seq_color(1.0 - k / 31)}"/>'
        )
    body.append(_text(x0 + 18, top + 8, "1", size=8))
    body.append(_text(x0 + 18, top + 96, "0", size=8))
    return _doc(width, height, body)
