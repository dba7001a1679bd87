"""Dependency-free SVG emitters for the two result figures.

fig3 analogue: accuracy vs target subsampling factor, one series per mode,
error bars at mu +/- sigma. fig5 analogue: accuracy vs actual factor s'
with the communication-airtime curve (1 - 1/s') on a secondary axis.

Series at the same integer factor are nudged horizontally by a fixed,
per-mode +/-0.05 offset; this is presentation-only and never enters the
stored results.
"""

import csv
import os
from fractions import Fraction

from ..errors import FormatError

MODE_COLORS = {"none": "#333333", "time": "#1f77b4", "tx": "#2ca02c",
               "rx": "#d62728", "txrx": "#9467bd"}
MODE_OFFSETS = {"none": 0.0, "time": -0.05, "tx": 0.0, "rx": 0.05,
                "txrx": 0.0}
COMMS_COLOR = "#8b5a2b"     # brown

WIDTH, HEIGHT = 640, 420
MARGIN = {"left": 60, "right": 60, "top": 30, "bottom": 50}


def parse_results(path):
    """Read results.csv into a list of row dicts with numeric fields.

    Malformed rows raise FormatError naming the 1-based line number.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "mode" not in reader.fieldnames:
            raise FormatError(f"{path}: line 1: missing results header")
        for row in reader:
            lineno = reader.line_num
            if None in row or any(v is None for v in row.values()):
                raise FormatError(f"{path}: line {lineno}: wrong field count")
            try:
                rows.append({
                    "mode": row["mode"],
                    "s": int(row["s"]),
                    "s_prime": Fraction(row["s_prime"]),
                    "sensing": Fraction(row["sensing_fraction"]),
                    "mu": float(row["mean_accuracy"]),
                    "sigma": float(row["stddev"]),
                })
            except (ValueError, ZeroDivisionError) as exc:
                raise FormatError(
                    f"{path}: line {lineno}: {exc}") from exc
    return rows


def comms_airtime(s_prime):
    """Fraction of airtime left for communication at actual factor s'."""
    s_prime = Fraction(s_prime)
    return 1 - 1 / s_prime


def comms_curve_points(s_max, step=Fraction(1, 4)):
    """Sampled (s', comms fraction) pairs from 1 to s_max inclusive."""
    pts = []
    s = Fraction(1)
    while s <= s_max:
        pts.append((s, comms_airtime(s)))
        s += step
    return pts


class _Canvas:
    def __init__(self, x_range, y_range):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.parts = []

    def x(self, v):
        span = WIDTH - MARGIN["left"] - MARGIN["right"]
        return MARGIN["left"] + (float(v) - self.x0) / (self.x1 - self.x0) * span

    def y(self, v, lo=None, hi=None):
        lo = self.y0 if lo is None else lo
        hi = self.y1 if hi is None else hi
        span = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        return HEIGHT - MARGIN["bottom"] - (float(v) - lo) / (hi - lo) * span

    def add(self, element):
        self.parts.append(element)

    def axes(self, x_label, y_label, y2_label=None):
        left, bottom = MARGIN["left"], HEIGHT - MARGIN["bottom"]
        right, top = WIDTH - MARGIN["right"], MARGIN["top"]
        self.add(f'<line x1="{left}" y1="{bottom}" x2="{right}" '
                 f'y2="{bottom}" stroke="black"/>')
        self.add(f'<line x1="{left}" y1="{bottom}" x2="{left}" '
                 f'y2="{top}" stroke="black"/>')
        self.add(f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 12}" '
                 f'text-anchor="middle" font-size="13">{x_label}</text>')
        self.add(f'<text x="16" y="{(top + bottom) / 2:.1f}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{(top + bottom) / 2:.1f})">{y_label}</text>')
        if y2_label:
            self.add(f'<line x1="{right}" y1="{bottom}" x2="{right}" '
                     f'y2="{top}" stroke="{COMMS_COLOR}"/>')
            self.add(f'<text x="{WIDTH - 12}" y="{(top + bottom) / 2:.1f}" '
                     f'font-size="13" text-anchor="middle" '
                     f'fill="{COMMS_COLOR}" transform="rotate(90 '
                     f'{WIDTH - 12} {(top + bottom) / 2:.1f})">'
                     f'{y2_label}</text>')
        # x ticks at integers, y ticks every 0.1
        xi = int(self.x0)
        while xi <= self.x1:
            px = self.x(xi)
            self.add(f'<line x1="{px:.2f}" y1="{bottom}" x2="{px:.2f}" '
                     f'y2="{bottom + 5}" stroke="black"/>')
            self.add(f'<text x="{px:.2f}" y="{bottom + 18}" font-size="11" '
                     f'text-anchor="middle">{xi}</text>')
            xi += 1
        tick = self.y0
        while tick <= self.y1 + 1e-9:
            py = self.y(tick)
            self.add(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" '
                     f'y2="{py:.2f}" stroke="black"/>')
            self.add(f'<text x="{left - 8}" y="{py + 4:.2f}" font-size="11" '
                     f'text-anchor="end">{tick:.1f}</text>')
            tick = round(tick + 0.1, 10)

    def render(self):
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
                f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
                f'{body}\n</svg>\n')


def _series(canvas, points, color, with_bars=True):
    for px, mu, sigma in points:
        x = canvas.x(px)
        y = canvas.y(mu)
        if with_bars and sigma > 0:
            y_lo, y_hi = canvas.y(mu - sigma), canvas.y(mu + sigma)
            canvas.add(f'<line x1="{x:.2f}" y1="{y_lo:.2f}" x2="{x:.2f}" '
                       f'y2="{y_hi:.2f}" stroke="{color}" '
                       f'class="errorbar"/>')
            for cap in (y_lo, y_hi):
                canvas.add(f'<line x1="{x - 3:.2f}" y1="{cap:.2f}" '
                           f'x2="{x + 3:.2f}" y2="{cap:.2f}" '
                           f'stroke="{color}"/>')
        canvas.add(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" '
                   f'fill="{color}" class="point"/>')


def figure_target(rows):
    """Accuracy vs target factor, per-mode series with error bars."""
    x_max = max(r["s"] for r in rows)
    canvas = _Canvas((1 - 0.25, x_max + 0.25), (0.0, 1.0))
    canvas.axes("target subsampling factor s", "test accuracy")
    modes = []
    for r in rows:
        if r["mode"] not in modes:
            modes.append(r["mode"])
    for i, mode in enumerate(modes):
        pts = [(r["s"] + MODE_OFFSETS.get(mode, 0.0), r["mu"], r["sigma"])
               for r in rows if r["mode"] == mode]
        color = MODE_COLORS.get(mode, "#000000")
        _series(canvas, pts, color)
        canvas.add(f'<text x="{WIDTH - MARGIN["right"] - 120}" '
                   f'y="{MARGIN["top"] + 15 * (i + 1)}" font-size="12" '
                   f'fill="{color}">{mode}</text>')
    return canvas.render()


def figure_actual(rows):
    """Accuracy vs actual factor s', plus the comms-airtime curve."""
    x_max = max(float(r["s_prime"]) for r in rows)
    x_max = max(x_max, 4.0)
    canvas = _Canvas((1 - 0.25, x_max + 0.25), (0.0, 1.0))
    canvas.axes("actual subsampling factor s'", "test accuracy",
                y2_label="communication airtime fraction")
    modes = []
    for r in rows:
        if r["mode"] not in modes:
            modes.append(r["mode"])
    for mode in modes:
        pts = [(float(r["s_prime"]) + MODE_OFFSETS.get(mode, 0.0),
                r["mu"], r["sigma"]) for r in rows if r["mode"] == mode]
        _series(canvas, pts, MODE_COLORS.get(mode, "#000000"))
    curve = comms_curve_points(Fraction(x_max).limit_denominator(4))
    path = " ".join(f'{canvas.x(s):.2f},{canvas.y(c):.2f}'
                    for s, c in curve)
    canvas.add(f'<polyline points="{path}" fill="none" '
               f'stroke="{COMMS_COLOR}" stroke-width="1.5" '
               f'class="comms-curve"/>')
    return canvas.render()


def emit_plots(results_csv, out_dir):
    """Write both figure analogues next to the results; returns the paths."""
    rows = parse_results(results_csv)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, text in (("fig_target_factor.svg", figure_target(rows)),
                       ("fig_actual_factor.svg", figure_actual(rows))):
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        paths.append(path)
    return paths
