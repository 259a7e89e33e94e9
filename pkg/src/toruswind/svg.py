"""Deterministic standalone SVG figures: curves, quiver plots and contour lines.

Output bytes depend only on the inputs (fixed 800×800 viewport, fixed number
formatting, no timestamps or random ids).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

SIZE = 800
MARGIN = 60
PALETTE = ("#1f4e9c", "#c0392b", "#27804a", "#7d3c98", "#b9770e", "#117a8b")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float) -> str:
    return f"{v:.3g}"


class _Frame:
    """Equal-aspect map from data coordinates to pixels (y up)."""

    def __init__(self, bounds):
        x0, x1, y0, y1 = bounds
        span = max(x1 - x0, y1 - y0, 1e-12)
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        self.x0, self.x1 = cx - 0.5 * span, cx + 0.5 * span
        self.y0, self.y1 = cy - 0.5 * span, cy + 0.5 * span
        self.scale = (SIZE - 2 * MARGIN) / span

    def px(self, x):
        return MARGIN + (np.asarray(x) - self.x0) * self.scale

    def py(self, y):
        return SIZE - MARGIN - (np.asarray(y) - self.y0) * self.scale


def _bounds(points: list[np.ndarray], pad: float = 0.05):
    allp = np.concatenate([np.asarray(p, dtype=float).reshape(-1, 2) for p in points])
    x0, y0 = allp.min(axis=0)
    x1, y1 = allp.max(axis=0)
    px = pad * max(x1 - x0, y1 - y0, 1e-12)
    return x0 - px, x1 + px, y0 - px, y1 + px


def _axes(fr: _Frame, title: str) -> list[str]:
    lo, hi = MARGIN, SIZE - MARGIN
    out = [f'<rect x="{lo}" y="{lo}" width="{hi - lo}" height="{hi - lo}" fill="none" stroke="#444" stroke-width="1"/>']
    if fr.x0 <= 0 <= fr.x1:
        x = _f(fr.px(0.0))
        out.append(f'<line x1="{x}" y1="{lo}" x2="{x}" y2="{hi}" stroke="#999" stroke-width="0.8"/>')
    if fr.y0 <= 0 <= fr.y1:
        y = _f(fr.py(0.0))
        out.append(f'<line x1="{lo}" y1="{y}" x2="{hi}" y2="{y}" stroke="#999" stroke-width="0.8"/>')
    for v in np.linspace(fr.x0, fr.x1, 5):
        out.append(f'<text x="{_f(fr.px(v))}" y="{hi + 20}" font-size="12" text-anchor="middle">{_tick(v)}</text>')
    for v in np.linspace(fr.y0, fr.y1, 5):
        out.append(f'<text x="{lo - 8}" y="{_f(fr.py(v) + 4)}" font-size="12" text-anchor="end">{_tick(v)}</text>')
    if title:
        safe = title.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(f'<text x="{SIZE // 2}" y="{lo - 20}" font-size="16" text-anchor="middle">{safe}</text>')
    return out


def _polyline(fr: _Frame, pts: np.ndarray, color: str, width: float = 1.5) -> str:
    pts = np.asarray(pts, dtype=float)
    coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(fr.px(pts[:, 0]), fr.py(pts[:, 1])))
    return f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def _arrow(fr: _Frame, x, y, u, v, length: float, color: str) -> str:
    n = np.hypot(u, v)
    if n == 0:
        return ""
    dx, dy = u / n * length, v / n * length
    x0, y0 = fr.px(x - 0.5 * dx), fr.py(y - 0.5 * dy)
    x1, y1 = fr.px(x + 0.5 * dx), fr.py(y + 0.5 * dy)
    ang = np.arctan2(y1 - y0, x1 - x0)
    head = 0.3 * length * fr.scale
    lx, ly = x1 - head * np.cos(ang - 0.4), y1 - head * np.sin(ang - 0.4)
    rx, ry = x1 - head * np.cos(ang + 0.4), y1 - head * np.sin(ang + 0.4)
    return (
        f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x1)}" y2="{_f(y1)}" stroke="{color}" stroke-width="1.2"/>'
        f'<polygon points="{_f(x1)},{_f(y1)} {_f(lx)},{_f(ly)} {_f(rx)},{_f(ry)}" fill="{color}"/>'
    )


def contour_lines(xs, ys, values, levels) -> list[tuple[float, np.ndarray]]:
    """Polylines of ``values[i, j]`` (sampled at xs[i], ys[j]) at each level."""
    import contourpy

    gen = contourpy.contour_generator(x=np.asarray(xs), y=np.asarray(ys), z=np.asarray(values).T, line_type="Separate")
    out = []
    for level in levels:
        for line in gen.lines(float(level)):
            if len(line) >= 2:
                out.append((float(level), np.asarray(line)))
    return out


def render_svg(curves=(), quiver=None, contours=None, title: str = "", bounds=None) -> str:
    """Build an SVG document.

    Parameters
    ----------
    curves : sequence of (n, 2) arrays
        Polylines in data coordinates.
    quiver : tuple (x, y, u, v), optional
        Arrow bases and directions; arrows are drawn at equal length.
    contours : tuple (xs, ys, values, levels), optional
        Grid data in ``values[i, j]`` layout and the levels to trace.
    """
    pts = [np.asarray(c, dtype=float) for c in curves]
    arrows = None
    if quiver is not None:
        arrows = [np.ravel(np.asarray(a, dtype=float)) for a in quiver]
        pts.append(np.column_stack(arrows[:2]))
    lines = []
    if contours is not None:
        xs, ys, values, levels = contours
        lines = contour_lines(xs, ys, values, levels)
        pts.append(np.array([[min(xs), min(ys)], [max(xs), max(ys)]], dtype=float))
    if not pts:
        raise ValueError("nothing to draw")
    fr = _Frame(bounds if bounds is not None else _bounds(pts))

    body = _axes(fr, title)
    for _, line in lines:
        body.append(_polyline(fr, line, "#555", width=1.0))
    for k, c in enumerate(curves):
        body.append(_polyline(fr, np.asarray(c, dtype=float), PALETTE[k % len(PALETTE)]))
    if arrows is not None:
        x, y, u, v = arrows
        spacing = np.sqrt((fr.x1 - fr.x0) ** 2 / max(len(x), 1))
        for i in range(len(x)):
            body.append(_arrow(fr, x[i], y[i], u[i], v[i], 0.7 * spacing, "#1f4e9c"))
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">'
    return "\n".join([head, f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>', *body, "</svg>", ""])


def emit_svg(path, curves=(), quiver=None, contours=None, title: str = "", bounds=None) -> Path:
    """Render and write an SVG file; returns the path written."""
    path = Path(path)
    path.write_text(render_svg(curves, quiver, contours, title, bounds), encoding="utf-8")
    return path
