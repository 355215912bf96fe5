"""Minimal standalone SVG line charts and heatmaps."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=30, bottom=50)
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]


def _fmt(v):
    return f"{v:.4g}"


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


class _Frame:
    def __init__(self, xlim, ylim, logx=False, logy=False):
        self.logx, self.logy = logx, logy
        self.x0, self.x1 = (np.log10(v) if logx else v for v in xlim)
        self.y0, self.y1 = (np.log10(v) if logy else v for v in ylim)
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        x = np.log10(x) if self.logx else np.asarray(x, float)
        return MARGIN["left"] + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        y = np.log10(y) if self.logy else np.asarray(y, float)
        return MARGIN["top"] + (1 - (y - self.y0) / (self.y1 - self.y0)) * self.ph

    def axes(self, xlabel, ylabel, title):
        out = [f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{self.pw}" '
               f'height="{self.ph}" fill="none" stroke="black"/>']
        base = MARGIN["top"] + self.ph
        for v in _ticks(self.x0, self.x1):
            x = MARGIN["left"] + (v - self.x0) / (self.x1 - self.x0) * self.pw
            label = _fmt(10**v if self.logx else v)
            out.append(f'<line x1="{x:.2f}" y1="{base}" x2="{x:.2f}" y2="{base + 5}" stroke="black"/>')
            out.append(f'<text x="{x:.2f}" y="{base + 18}" font-size="11" '
                       f'text-anchor="middle">{label}</text>')
        for v in _ticks(self.y0, self.y1):
            y = MARGIN["top"] + (1 - (v - self.y0) / (self.y1 - self.y0)) * self.ph
            label = _fmt(10**v if self.logy else v)
            out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{y:.2f}" x2="{MARGIN["left"]}" '
                       f'y2="{y:.2f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN["left"] - 8}" y="{y + 4:.2f}" font-size="11" '
                       f'text-anchor="end">{label}</text>')
        out.append(f'<text x="{MARGIN["left"] + self.pw / 2}" y="{HEIGHT - 10}" font-size="13" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
        out.append(f'<text x="15" y="{MARGIN["top"] + self.ph / 2}" font-size="13" '
                   f'text-anchor="middle" transform="rotate(-90 15 {MARGIN["top"] + self.ph / 2})">'
                   f'{escape(ylabel)}</text>')
        if title:
            out.append(f'<text x="{WIDTH / 2}" y="18" font-size="14" '
                       f'text-anchor="middle">{escape(title)}</text>')
        return out


def _polyline(frame, x, y, color, dash=None):
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(frame.px(x), frame.py(y)))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{extra}/>'


def _document(body):
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            '<rect width="100%" height="100%" fill="white"/>\n'
            + "\n".join(body) + "\n</svg>\n")


def line_chart(series, xlabel="", ylabel="", title="", logx=False):
    """``series`` is a list of ``(label, x, y)``; returns SVG text."""
    if not series:
        raise ValueError("no series to plot")
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    ok = np.isfinite(xs) & np.isfinite(ys)
    ymin, ymax = ys[ok].min(), ys[ok].max()
    pad = 0.05 * (ymax - ymin or 1)
    frame = _Frame((xs[ok].min(), xs[ok].max()), (ymin - pad, ymax + pad), logx=logx)
    body = frame.axes(xlabel, ylabel, title)
    for i, (label, x, y) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        x, y = np.asarray(x, float), np.asarray(y, float)
        keep = np.isfinite(x) & np.isfinite(y)
        body.append(_polyline(frame, x[keep], y[keep], color))
        ly = MARGIN["top"] + 16 + 16 * i
        lx = WIDTH - MARGIN["right"] - 150
        body.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{lx + 26}" y="{ly}" font-size="11">{escape(label)}</text>')
    return _document(body)


def _viridis_like(v):
    # blue -> green -> yellow ramp
    v = float(np.clip(v, 0, 1))
    stops = [(0.0, (68, 1, 84)), (0.5, (33, 145, 140)), (1.0, (253, 231, 37))]
    for (a, ca), (b, cb) in zip(stops, stops[1:]):
        if v <= b:
            f = (v - a) / (b - a)
            r, g, bl = (round(p + f * (q - p)) for p, q in zip(ca, cb))
            return f"#{r:02x}{g:02x}{bl:02x}"
    return "#fde725"


def heatmap(x, y, z, xlabel="", ylabel="", title="", overlays=()):
    """Cell ``z[i, j]`` is drawn at ``(x[j], y[i])``; ``overlays`` are ``(label, x, y)``."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    if z.shape != (len(y), len(x)):
        raise ValueError(f"z has shape {z.shape}, expected {(len(y), len(x))}")
    frame = _Frame((x.min(), x.max()), (y.min(), y.max()))
    zmin, zmax = np.nanmin(z), np.nanmax(z)
    span = zmax - zmin or 1.0

    def edges(v):
        mid = (v[1:] + v[:-1]) / 2 if len(v) > 1 else v
        first = v[0] - (mid[0] - v[0]) if len(v) > 1 else v[0] - 0.5
        last = v[-1] + (v[-1] - mid[-1]) if len(v) > 1 else v[0] + 0.5
        return np.clip(np.concatenate([[first], mid, [last]]), v.min(), v.max())

    ex, ey = frame.px(edges(x)), frame.py(edges(y))
    body = []
    for i in range(len(y)):
        for j in range(len(x)):
            c = _viridis_like((z[i, j] - zmin) / span)
            body.append(f'<rect x="{ex[j]:.2f}" y="{ey[i + 1]:.2f}" width="{ex[j + 1] - ex[j]:.2f}" '
                        f'height="{ey[i] - ey[i + 1]:.2f}" fill="{c}"/>')
    body += frame.axes(xlabel, ylabel, title)
    for k, (label, ox, oy) in enumerate(overlays):
        ox, oy = np.asarray(ox, float), np.asarray(oy, float)
        keep = (ox >= x.min()) & (ox <= x.max()) & (oy >= y.min()) & (oy <= y.max())
        if keep.sum() >= 2:
            body.append(_polyline(frame, ox[keep], oy[keep], ["red", "white"][k % 2], "6,3"))
    return _document(body)
