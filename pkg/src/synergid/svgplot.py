"""Minimal SVG line/scatter plots. Elements carry CSS classes so tests can count them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

BLUE = "#1f77b4"
RED = "#d62728"
BLACK = "#222222"
GREY = "#888888"


def nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.4g}"


@dataclass
class Panel:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    items: list = field(default_factory=list)
    vlines: list = field(default_factory=list)
    hlines: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def scatter(self, x, y, color=BLUE, label="", cls="point", r=2.5):
        self.items.append(("scatter", list(map(float, x)), list(map(float, y)), color, label, cls, r))

    def line(self, x, y, color=BLACK, label="", cls="series", dash=None):
        self.items.append(("line", list(map(float, x)), list(map(float, y)), color, label, cls, dash))

    def hline(self, y, color=GREY, label="", cls="reference", dash="6,4"):
        self.hlines.append((float(y), color, label, cls, dash))

    def vline(self, x, color=GREY, cls="rest-marker", dash="2,4"):
        self.vlines.append((float(x), color, cls, dash))

    def note(self, text, cls="note", attrs=None):
        self.notes.append((text, cls, attrs or {}))

    def _limits(self):
        xs = [v for it in self.items for v in it[1]] + [v[0] for v in self.vlines]
        ys = [v for it in self.items for v in it[2]] + [h[0] for h in self.hlines]
        xs = [v for v in xs if math.isfinite(v)] or [0.0, 1.0]
        ys = [v for v in ys if math.isfinite(v)] or [0.0, 1.0]
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.05 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self, ox, oy, w, h) -> list[str]:
        x0, x1, y0, y1 = self._limits()
        left, right, top, bottom = 70, 20, 30, 45
        pw, ph = w - left - right, h - top - bottom

        def sx(v):
            return ox + left + (v - x0) / (x1 - x0) * pw

        def sy(v):
            return oy + top + (1 - (v - y0) / (y1 - y0)) * ph

        out = [f'<g class="panel">',
               f'<rect x="{ox + left}" y="{oy + top}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="{BLACK}"/>']
        if self.title:
            out.append(f'<text x="{ox + left + pw / 2:.1f}" y="{oy + 18}" text-anchor="middle" '
                       f'font-size="14">{escape(self.title)}</text>')
        for t in nice_ticks(x0, x1):
            out.append(f'<text class="xtick" x="{sx(t):.1f}" y="{oy + top + ph + 16}" '
                       f'text-anchor="middle" font-size="10">{_fmt(t)}</text>')
        for t in nice_ticks(y0, y1):
            out.append(f'<text class="ytick" x="{ox + left - 6}" y="{sy(t) + 3:.1f}" '
                       f'text-anchor="end" font-size="10">{_fmt(t)}</text>')
        out.append(f'<text x="{ox + left + pw / 2:.1f}" y="{oy + h - 8}" text-anchor="middle" '
                   f'font-size="12">{escape(self.xlabel)}</text>')
        out.append(f'<text x="{ox + 14}" y="{oy + top + ph / 2:.1f}" text-anchor="middle" '
                   f'font-size="12" transform="rotate(-90 {ox + 14} {oy + top + ph / 2:.1f})">'
                   f'{escape(self.ylabel)}</text>')
        for y, color, label, cls, dash in self.hlines:
            out.append(f'<line class="{cls}" x1="{ox + left}" x2="{ox + left + pw}" y1="{sy(y):.2f}" '
                       f'y2="{sy(y):.2f}" stroke="{color}" stroke-dasharray="{dash}"/>')
        for x, color, cls, dash in self.vlines:
            out.append(f'<line class="{cls}" x1="{sx(x):.2f}" x2="{sx(x):.2f}" y1="{oy + top}" '
                       f'y2="{oy + top + ph}" stroke="{color}" stroke-dasharray="{dash}"/>')
        legend = []
        for kind, xs, ys, color, label, cls, extra in self.items:
            pts = [(sx(a), sy(b)) for a, b in zip(xs, ys) if math.isfinite(a) and math.isfinite(b)]
            if kind == "scatter":
                out.extend(f'<circle class="{cls}" cx="{px:.2f}" cy="{py:.2f}" r="{extra}" '
                           f'fill="{color}" fill-opacity="0.6"/>' for px, py in pts)
            else:
                dash = f' stroke-dasharray="{extra}"' if extra else ""
                path = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
                out.append(f'<polyline class="{cls}" points="{path}" fill="none" '
                           f'stroke="{color}" stroke-width="1.5"{dash}/>')
            if label:
                legend.append((label, color))
        for y, color, label, _, _ in self.hlines:
            if label:
                legend.append((label, color))
        for i, (label, color) in enumerate(legend):
            ly = oy + top + 14 + 14 * i
            out.append(f'<rect x="{ox + left + pw - 150}" y="{ly - 8}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{ox + left + pw - 135}" y="{ly + 1}" font-size="10">{escape(label)}</text>')
        for i, (text, cls, attrs) in enumerate(self.notes):
            extra = "".join(f' {k}="{escape(str(v))}"' for k, v in attrs.items())
            out.append(f'<text class="{cls}"{extra} x="{ox + left + 8}" y="{oy + top + 16 + 14 * i}" '
                       f'font-size="12">{escape(text)}</text>')
        out.append("</g>")
        return out


def render(panels: list[Panel], width: int = 720, panel_height: int = 300) -> str:
    height = panel_height * len(panels)
    body = []
    for i, p in enumerate(panels):
        body.extend(p.render(0, i * panel_height, width, panel_height))
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        *body,
        "</svg>",
        "",
    ])
