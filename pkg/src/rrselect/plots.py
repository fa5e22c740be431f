"""Self-contained SVG charts for experiment results.

Each file carries the plotted numbers as a CSV block inside an XML comment,
so a chart can be reviewed as text.
"""

from __future__ import annotations

import math
from dataclasses import replace
from pathlib import Path
from xml.sax.saxutils import escape

from .experiment import METHODS, read_records, summarize

WIDTH, HEIGHT = 560, 380
LEFT, RIGHT, TOP, BOTTOM = 70, 130, 40, 55
COLORS = {"brute": "#555555", "m1": "#1f77b4", "m2": "#d62728", "special": "#2ca02c"}
MARKERS = {"brute": "square", "m1": "circle", "m2": "triangle", "special": "diamond"}


class Axis:
    def __init__(self, lo, hi, pixel_lo, pixel_hi, log=False):
        if log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi - lo < 1e-12:
            lo, hi = lo - 1, hi + 1
        self.lo, self.hi, self.log = lo, hi, log
        self.p0, self.p1 = pixel_lo, pixel_hi

    def __call__(self, v):
        if self.log:
            v = math.log10(v)
        return self.p0 + (v - self.lo) / (self.hi - self.lo) * (self.p1 - self.p0)

    def ticks(self):
        if self.log:
            return [10.0 ** e for e in range(math.floor(self.lo), math.ceil(self.hi) + 1)
                    if self.lo - 1e-9 <= e <= self.hi + 1e-9]
        span = self.hi - self.lo
        step = 10 ** math.floor(math.log10(span / 5)) if span > 0 else 1
        for mult in (1, 2, 5, 10):
            if span / (step * mult) <= 6:
                step *= mult
                break
        first = math.ceil(self.lo / step) * step
        count = int((self.hi - first) / step + 1e-9) + 1
        return [first + s * step for s in range(count)]


def _fmt(v):
    if v == 0:
        return "0"
    if abs(v) >= 1000 or abs(v) < 0.01:
        return f"{v:.0e}".replace("e+0", "e").replace("e-0", "e-")
    return f"{v:g}"


def _marker(kind, x, y, color):
    if kind == "square":
        return f'<rect x="{x - 4:.1f}" y="{y - 4:.1f}" width="8" height="8" fill="{color}"/>'
    if kind == "triangle":
        return (f'<polygon points="{x:.1f},{y - 5:.1f} {x - 5:.1f},{y + 4:.1f} {x + 5:.1f},{y + 4:.1f}"'
                f' fill="{color}"/>')
    if kind == "diamond":
        return (f'<polygon points="{x:.1f},{y - 5:.1f} {x + 5:.1f},{y:.1f} {x:.1f},{y + 5:.1f}'
                f' {x - 5:.1f},{y:.1f}" fill="{color}"/>')
    return f'<circle cx="{x:.1f}" cy="{y:.1f}" r="4" fill="{color}"/>'


def _frame(title, xlabel, ylabel, xaxis, yaxis, data_rows):
    x0, x1 = LEFT, WIDTH - RIGHT
    y0, y1 = HEIGHT - BOTTOM, TOP
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           "<!-- data",
           *(",".join(str(c) for c in row) for row in data_rows),
           "-->",
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
           f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>']
    for t in xaxis.ticks():
        px = xaxis(t)
        out.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{y0 + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in yaxis.ticks():
        py = yaxis(t)
        out.append(f'<line x1="{x0 - 5}" y1="{py:.1f}" x2="{x1}" y2="{py:.1f}" stroke="#dddddd"/>')
        out.append(f'<text x="{x0 - 8}" y="{py + 4:.1f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(y0 + y1) / 2:.0f})">{escape(ylabel)}</text>')
    return out


def _legend(out, names):
    for r, name in enumerate(names):
        y = TOP + 12 + 18 * r
        x = WIDTH - RIGHT + 20
        out.append(_marker(MARKERS.get(name, "circle"), x, y, COLORS.get(name, "black")))
        out.append(f'<text x="{x + 12}" y="{y + 4}">{escape(name)}</text>')


def line_chart(series, title, xlabel, ylabel, log_y=False, y_range=None, reference=None):
    """``series``: name -> list of (x, y). ``reference``: optional horizontal guide line."""
    points = [(x, y) for pts in series.values() for x, y in pts
              if not (log_y and y <= 0) and not math.isnan(y)]
    if not points:
        raise ValueError("nothing to plot")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points] + ([reference] if reference is not None else [])
    lo, hi = y_range or (min(ys), max(ys))
    if not log_y and y_range is None:
        lo = min(lo, 0)
        hi = hi + 0.05 * (hi - lo or 1)
    xaxis = Axis(min(xs), max(xs), LEFT + 10, WIDTH - RIGHT - 10)
    yaxis = Axis(lo, hi, HEIGHT - BOTTOM, TOP, log=log_y)
    rows = [("series", "x", "y")] + [(n, x, y) for n, pts in series.items() for x, y in pts]
    out = _frame(title, xlabel, ylabel, xaxis, yaxis, rows)
    if reference is not None:
        py = yaxis(reference)
        out.append(f'<line x1="{LEFT}" y1="{py:.1f}" x2="{WIDTH - RIGHT}" y2="{py:.1f}" '
                   f'stroke="#888888" stroke-dasharray="4 3"/>')
    for name, pts in series.items():
        pts = [(x, y) for x, y in sorted(pts) if not (log_y and y <= 0) and not math.isnan(y)]
        color = COLORS.get(name, "black")
        if len(pts) > 1:
            path = " ".join(f"{xaxis(x):.1f},{yaxis(y):.1f}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.extend(_marker(MARKERS.get(name, "circle"), xaxis(x), yaxis(y), color) for x, y in pts)
    _legend(out, list(series))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_chart(pairs, title, xlabel, ylabel):
    """Log-log scatter of ``(x, y)`` pairs with the diagonal ``y = x``."""
    if not pairs:
        raise ValueError("nothing to plot")
    vals = [max(v, 1e-3) for p in pairs for v in p]
    lo, hi = min(vals), max(vals)
    if hi / lo < 10:
        lo, hi = lo / 3, hi * 3
    xaxis = Axis(lo, hi, LEFT + 10, WIDTH - RIGHT - 10, log=True)
    yaxis = Axis(lo, hi, HEIGHT - BOTTOM, TOP, log=True)
    rows = [("x", "y")] + list(pairs)
    out = _frame(title, xlabel, ylabel, xaxis, yaxis, rows)
    out.append(f'<line class="diagonal" x1="{xaxis(lo):.1f}" y1="{yaxis(lo):.1f}" '
               f'x2="{xaxis(hi):.1f}" y2="{yaxis(hi):.1f}" stroke="#888888" stroke-dasharray="4 3"/>')
    out.extend(_marker("circle", xaxis(max(x, 1e-3)), yaxis(max(y, 1e-3)), "#1f77b4")
               for x, y in pairs)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot(csv_path, out_dir, time_limit=None, sweep_label="sweep"):
    """Write the four chart families for one results CSV; returns the written paths.

    Without ``time_limit`` a non-optimal run counts with its recorded time.
    """
    records = read_records(csv_path)
    if not records:
        raise ValueError(f"{csv_path}: no records")
    if any(r.sweep != "" for r in records):
        records = [r for r in records if r.sweep != ""]
    else:
        records = [replace(r, sweep=0) for r in records]
    rows = summarize(records, time_limit)
    methods = [m for m in METHODS if any(r["method"] == m for r in rows)]

    def series(key):
        return {m: [(r["sweep"], r[key]) for r in rows if r["method"] == m] for m in methods}

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    charts = {
        "solved.svg": line_chart(series("solved"), "Fraction solved to optimality", sweep_label,
                                 "fraction solved", y_range=(0, 1.05)),
        "time.svg": line_chart({m: [(x, max(y, 1e-3)) for x, y in pts]
                                for m, pts in series("time_ms").items()},
                               "Average time (unsolved count at the limit)", sweep_label,
                               "time [ms]", log_y=True),
        "iterations.svg": line_chart(series("iterations"), "Average iterations", sweep_label,
                                     "iterations", reference=2),
    }
    timed = {}
    for r in records:
        timed.setdefault(r.instance_id, {})[r.method] = r.time_ms
    if len(methods) >= 2:
        a, b = ("m1", "m2") if {"m1", "m2"} <= set(methods) else methods[:2]
        pairs = [(t[a], t[b]) for t in timed.values() if a in t and b in t]
        if pairs:
            charts["scatter.svg"] = scatter_chart(pairs, "Instance-by-instance solution times",
                                                  f"{a} time [ms]", f"{b} time [ms]")
    written = []
    for name, svg in charts.items():
        path = out_dir / name
        path.write_text(svg, encoding="utf-8")
        written.append(path)
    return written
