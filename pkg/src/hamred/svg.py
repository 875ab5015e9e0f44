"""Minimal SVG line plots: polylines, axes with ticks and point markers.

Output is a pure function of the inputs; coordinates are printed with a
fixed number of decimals so repeated runs give identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ValidationError
from .trajectory import Trajectory

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


@dataclass(frozen=True)
class Panel:
    title: str
    curves: tuple  # complex arrays
    markers: tuple = ()  # (complex point, label)


@dataclass(frozen=True)
class SvgOptions:
    width: int = 420
    height: int = 420
    margin: int = 40
    n_ticks: int = 5
    stroke_width: float = 1.5
    decimals: int = 2
    extra: dict = field(default_factory=dict)


def _nice_ticks(lo, hi, n):
    span = hi - lo
    raw = span / max(n, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = min((k * mag for k in (1, 2, 5, 10) if k * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-12 * span:
        ticks.append(0.0 if abs(v) < 1e-12 * span else v)
        v += step
    return ticks


def _fmt(v, d):
    s = f"{v:.{d}f}"
    return "0" if s.strip("-0.") == "" else s


def _panel_svg(panel: Panel, x0: float, opts: SvgOptions) -> list:
    pts = [np.asarray(c, dtype=complex).ravel() for c in panel.curves]
    allp = np.concatenate(pts + [np.array([m[0] for m in panel.markers], dtype=complex)])
    if allp.size == 0 or not np.all(np.isfinite(allp)):
        raise ValidationError("nothing finite to plot")
    xlo, xhi = float(allp.real.min()), float(allp.real.max())
    ylo, yhi = float(allp.imag.min()), float(allp.imag.max())
    half = 0.55 * max(xhi - xlo, yhi - ylo, 1e-9)
    cx, cy = 0.5 * (xlo + xhi), 0.5 * (ylo + yhi)
    xlo, xhi, ylo, yhi = cx - half, cx + half, cy - half, cy + half
    w, h, mg, d = opts.width, opts.height, opts.margin, opts.decimals
    sx = (w - 2 * mg) / (xhi - xlo)
    sy = (h - 2 * mg) / (yhi - ylo)

    def X(v):
        return x0 + mg + (v - xlo) * sx

    def Y(v):
        return h - mg - (v - ylo) * sy

    out = ['<g font-family="sans-serif" font-size="10">',
           f'<text x="{_fmt(x0 + w / 2, d)}" y="16" text-anchor="middle" font-size="12">{panel.title}</text>',
           f'<rect x="{_fmt(x0 + mg, d)}" y="{mg}" width="{w - 2 * mg}" height="{h - 2 * mg}" '
           f'fill="none" stroke="#888"/>']
    for t in _nice_ticks(xlo, xhi, opts.n_ticks):
        out.append(f'<line x1="{_fmt(X(t), d)}" y1="{h - mg}" x2="{_fmt(X(t), d)}" y2="{h - mg + 4}" stroke="#888"/>')
        out.append(f'<text x="{_fmt(X(t), d)}" y="{h - mg + 15}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(ylo, yhi, opts.n_ticks):
        out.append(f'<line x1="{_fmt(x0 + mg - 4, d)}" y1="{_fmt(Y(t), d)}" x2="{_fmt(x0 + mg, d)}" '
                   f'y2="{_fmt(Y(t), d)}" stroke="#888"/>')
        out.append(f'<text x="{_fmt(x0 + mg - 6, d)}" y="{_fmt(Y(t) + 3, d)}" text-anchor="end">{t:g}</text>')
    if xlo < 0 < xhi:
        out.append(f'<line x1="{_fmt(X(0), d)}" y1="{mg}" x2="{_fmt(X(0), d)}" y2="{h - mg}" '
                   f'stroke="#ccc" stroke-dasharray="3,3"/>')
    if ylo < 0 < yhi:
        out.append(f'<line x1="{_fmt(x0 + mg, d)}" y1="{_fmt(Y(0), d)}" x2="{_fmt(x0 + w - mg, d)}" '
                   f'y2="{_fmt(Y(0), d)}" stroke="#ccc" stroke-dasharray="3,3"/>')
    for k, c in enumerate(pts):
        coords = " ".join(f"{_fmt(X(v.real), d)},{_fmt(Y(v.imag), d)}" for v in c)
        out.append(f'<polyline fill="none" stroke="{COLORS[k % len(COLORS)]}" '
                   f'stroke-width="{opts.stroke_width:g}" points="{coords}"/>')
    for pt, label in panel.markers:
        out.append(f'<circle cx="{_fmt(X(pt.real), d)}" cy="{_fmt(Y(pt.imag), d)}" r="3" fill="black"/>')
        out.append(f'<text x="{_fmt(X(pt.real) + 5, d)}" y="{_fmt(Y(pt.imag) - 5, d)}">{label}</text>')
    out.append("</g>")
    return out


def render(panels, opts: SvgOptions | None = None) -> str:
    opts = opts or SvgOptions()
    panels = list(panels)
    if not panels:
        raise ValidationError("no panels to draw")
    total_w = opts.width * len(panels)
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{opts.height}" '
             f'viewBox="0 0 {total_w} {opts.height}">',
             f'<rect width="{total_w}" height="{opts.height}" fill="white"/>']
    for i, p in enumerate(panels):
        lines += _panel_svg(p, i * opts.width, opts)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _projection(traj: Trajectory) -> np.ndarray:
    if len(traj) == 0:
        raise ValidationError("empty trajectory")
    x = traj.real_vectors()
    return x[:, 0] + 1j * x[:, 1]


def emit_svg(traj, options: SvgOptions | None = None, title: str | None = None, markers=()) -> str:
    """Plot the position projection of one trajectory, or of several side by side.

    ``traj`` is a Trajectory or a sequence of them (one panel each).
    ``markers`` is a sequence of (complex point, label) drawn in every panel.
    """
    trajs = [traj] if isinstance(traj, Trajectory) else list(traj)
    if not trajs:
        raise ValidationError("empty trajectory list")
    panels = [Panel(title if title is not None else (t.system or "trajectory"),
                    (_projection(t),), tuple(markers)) for t in trajs]
    return render(panels, options)
