"""Hand-rolled static SVG charts (no plotting dependency).

Line plots, log-log plots, and bar charts, plus a four-panel dashboard
composed from the same building blocks.  Output is deterministic for
identical inputs; an optional timestamp string is the only run-dependent
decoration and the caller decides whether to pass one.
"""

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f6fb2", "#c84b3c", "#3a8f5d", "#8456a8", "#b08a2e", "#4f5d6e")

_MARGIN = {"left": 64.0, "right": 18.0, "top": 34.0, "bottom": 46.0}


def _fmt(v):
    # pixel coordinates; two decimals keep files small and diffs stable
    return f"{v:.2f}"


def _tick_label(v):
    if v == 0:
        return "0"
    a = abs(v)
    if 1e-3 <= a < 1e4:
        s = f"{v:.6g}"
    else:
        s = f"{v:.2e}"
    return s


def _ticks(lo, hi, target=5):
    span = hi - lo
    if not math.isfinite(span) or span <= 0:
        return [lo]
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = mag
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if span / step <= target:
            break
    start = math.ceil(lo / step - 1e-9) * step
    out = []
    t = start
    while t <= hi + 1e-9 * span:
        out.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return out


def _log_ticks(lo, hi):
    # decade ticks; fall back to plain ticks in log space for narrow ranges
    d0, d1 = math.floor(lo), math.ceil(hi)
    if d1 - d0 <= 7:
        return [float(d) for d in range(int(d0), int(d1) + 1)
                if lo - 1e-9 <= d <= hi + 1e-9] or [lo, hi]
    return _ticks(lo, hi)


class _Axes:
    """Maps data coordinates onto a pixel box and draws the frame."""

    def __init__(self, x0, y0, width, height, xlim, ylim,
                 log_x=False, log_y=False):
        self.x0, self.y0 = x0, y0
        self.w, self.h = width, height
        self.log_x, self.log_y = log_x, log_y
        self.xlim = self._limits(xlim, log_x)
        self.ylim = self._limits(ylim, log_y)

    @staticmethod
    def _limits(lim, logscale):
        lo, hi = lim
        if logscale:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi <= lo:
            pad = 0.5 if lo == 0 else abs(lo) * 0.05 + 1e-12
            lo, hi = lo - pad, hi + pad
        return lo, hi

    def px(self, x):
        v = math.log10(x) if self.log_x else x
        lo, hi = self.xlim
        return self.x0 + (v - lo) / (hi - lo) * self.w

    def py(self, y):
        v = math.log10(y) if self.log_y else y
        lo, hi = self.ylim
        return self.y0 + self.h - (v - lo) / (hi - lo) * self.h

    def frame(self, xlabel, ylabel):
        parts = [
            f'<rect x="{_fmt(self.x0)}" y="{_fmt(self.y0)}" '
            f'width="{_fmt(self.w)}" height="{_fmt(self.h)}" '
            'fill="none" stroke="#2b2b2b" stroke-width="1"/>'
        ]
        xt = (_log_ticks(*self.xlim) if self.log_x else _ticks(*self.xlim))
        yt = (_log_ticks(*self.ylim) if self.log_y else _ticks(*self.ylim))
        for t in xt:
            px = self.x0 + (t - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * self.w
            label = _tick_label(10.0 ** t) if self.log_x else _tick_label(t)
            parts.append(
                f'<line x1="{_fmt(px)}" y1="{_fmt(self.y0 + self.h)}" '
                f'x2="{_fmt(px)}" y2="{_fmt(self.y0 + self.h + 4)}" '
                'stroke="#2b2b2b" stroke-width="1"/>')
            parts.append(
                f'<text x="{_fmt(px)}" y="{_fmt(self.y0 + self.h + 16)}" '
                'font-size="10" text-anchor="middle" fill="#2b2b2b">'
                f'{escape(label)}</text>')
        for t in yt:
            py = self.y0 + self.h - (t - self.ylim[0]) / (self.ylim[1] - self.ylim[0]) * self.h
            label = _tick_label(10.0 ** t) if self.log_y else _tick_label(t)
            parts.append(
                f'<line x1="{_fmt(self.x0 - 4)}" y1="{_fmt(py)}" '
                f'x2="{_fmt(self.x0)}" y2="{_fmt(py)}" '
                'stroke="#2b2b2b" stroke-width="1"/>')
            parts.append(
                f'<text x="{_fmt(self.x0 - 7)}" y="{_fmt(py + 3)}" '
                'font-size="10" text-anchor="end" fill="#2b2b2b">'
                f'{escape(label)}</text>')
        parts.append(
            f'<text x="{_fmt(self.x0 + self.w / 2)}" '
            f'y="{_fmt(self.y0 + self.h + 34)}" font-size="11" '
            f'text-anchor="middle" fill="#2b2b2b">{escape(xlabel)}</text>')
        parts.append(
            f'<text x="{_fmt(self.x0 - 48)}" y="{_fmt(self.y0 + self.h / 2)}" '
            'font-size="11" text-anchor="middle" fill="#2b2b2b" '
            f'transform="rotate(-90 {_fmt(self.x0 - 48)} '
            f'{_fmt(self.y0 + self.h / 2)})">{escape(ylabel)}</text>')
        return parts

    def polyline(self, x, y, color, dash=None):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        keep = np.isfinite(x) & np.isfinite(y)
        if self.log_x:
            keep &= x > 0
        if self.log_y:
            keep &= y > 0
        parts = []
        # split at gaps so non-finite stretches drop out instead of bridging
        runs = np.split(np.arange(x.size), np.nonzero(np.diff(keep.astype(int)))[0] + 1)
        for run in runs:
            if run.size < 2 or not keep[run[0]]:
                continue
            pts = " ".join(f"{_fmt(self.px(xv))},{_fmt(self.py(yv))}"
                           for xv, yv in zip(x[run], y[run]))
            extra = f' stroke-dasharray="{dash}"' if dash else ""
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"{extra}/>')
        return parts


def _data_limits(arrays, logscale):
    lo, hi = np.inf, -np.inf
    for a in arrays:
        a = np.asarray(a, dtype=np.float64)
        mask = np.isfinite(a)
        if logscale:
            mask &= a > 0
        if mask.any():
            lo = min(lo, float(a[mask].min()))
            hi = max(hi, float(a[mask].max()))
    if not np.isfinite(lo):
        lo, hi = (0.1, 1.0) if logscale else (0.0, 1.0)
    if not logscale and lo > 0 and lo < 0.25 * (hi - lo):
        lo = 0.0      # anchor near-zero ranges at zero
    return lo, hi


def _legend(x0, y0, labels, colors, note):
    parts = []
    y = y0
    for label, color in zip(labels, colors):
        parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y - 3)}" '
                     f'x2="{_fmt(x0 + 18)}" y2="{_fmt(y - 3)}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_fmt(x0 + 23)}" y="{_fmt(y)}" '
                     f'font-size="10" fill="#2b2b2b">{escape(label)}</text>')
        y += 14
    if note:
        parts.append(f'<text x="{_fmt(x0)}" y="{_fmt(y)}" font-size="10" '
                     f'fill="#555555">{escape(note)}</text>')
    return parts


def chart_group(x, series, labels, *, title, xlabel, ylabel, note="",
                log_x=False, log_y=False, origin=(0.0, 0.0),
                width=640.0, height=420.0, overlays=()):
    """One chart as a <g> element; overlays are (x, y, label, dash) tuples."""
    gx, gy = origin
    box_w = width - _MARGIN["left"] - _MARGIN["right"]
    box_h = height - _MARGIN["top"] - _MARGIN["bottom"]
    all_y = list(series) + [o[1] for o in overlays]
    all_x = [x] + [o[0] for o in overlays]
    axes = _Axes(gx + _MARGIN["left"], gy + _MARGIN["top"], box_w, box_h,
                 _data_limits(all_x, log_x), _data_limits(all_y, log_y),
                 log_x=log_x, log_y=log_y)
    parts = [f'<text x="{_fmt(gx + width / 2)}" y="{_fmt(gy + 18)}" '
             'font-size="13" text-anchor="middle" fill="#111111">'
             f'{escape(title)}</text>']
    parts += axes.frame(xlabel, ylabel)
    colors = [PALETTE[i % len(PALETTE)] for i in range(len(series))]
    for ys, color in zip(series, colors):
        parts += axes.polyline(x, ys, color)
    leg_labels = list(labels)
    for ox, oy, olabel, odash in overlays:
        parts += axes.polyline(ox, oy, "#2b2b2b", dash=odash or "5,3")
        leg_labels.append(olabel)
        colors.append("#2b2b2b")
    parts += _legend(axes.x0 + 8, axes.y0 + 14, leg_labels, colors, note)
    return "<g>" + "".join(parts) + "</g>"


def bar_group(labels, values, *, title, ylabel, note="",
              origin=(0.0, 0.0), width=640.0, height=420.0):
    gx, gy = origin
    box_w = width - _MARGIN["left"] - _MARGIN["right"]
    box_h = height - _MARGIN["top"] - _MARGIN["bottom"]
    hi = max(1e-12, max(float(v) for v in values))
    axes = _Axes(gx + _MARGIN["left"], gy + _MARGIN["top"], box_w, box_h,
                 (0.0, float(len(values))), (0.0, hi * 1.1))
    parts = [f'<text x="{_fmt(gx + width / 2)}" y="{_fmt(gy + 18)}" '
             'font-size="13" text-anchor="middle" fill="#111111">'
             f'{escape(title)}</text>']
    parts += axes.frame("", ylabel)
    slot = box_w / len(values)
    for k, (label, v) in enumerate(zip(labels, values)):
        x_left = axes.x0 + slot * (k + 0.15)
        y_top = axes.py(float(v))
        parts.append(
            f'<rect x="{_fmt(x_left)}" y="{_fmt(y_top)}" '
            f'width="{_fmt(slot * 0.7)}" '
            f'height="{_fmt(axes.y0 + box_h - y_top)}" '
            f'fill="{PALETTE[k % len(PALETTE)]}"/>')
        parts.append(
            f'<text x="{_fmt(x_left + slot * 0.35)}" '
            f'y="{_fmt(axes.y0 + box_h + 16)}" font-size="10" '
            f'text-anchor="middle" fill="#2b2b2b">{escape(label)}</text>')
    if note:
        parts.append(f'<text x="{_fmt(axes.x0 + 8)}" y="{_fmt(axes.y0 + 14)}" '
                     f'font-size="10" fill="#555555">{escape(note)}</text>')
    return "<g>" + "".join(parts) + "</g>"


def document(groups, *, width, height, timestamp=None):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(width)}" '
            f'height="{int(height)}" viewBox="0 0 {int(width)} {int(height)}" '
            'font-family="Helvetica, Arial, sans-serif">'
            f'<rect width="{int(width)}" height="{int(height)}" fill="#ffffff"/>')
    stamp = ""
    if timestamp:
        stamp = (f'<text x="{int(width) - 8}" y="{int(height) - 6}" '
                 'font-size="9" text-anchor="end" fill="#999999">'
                 f'{escape(timestamp)}</text>')
    return head + "".join(groups) + stamp + "</svg>\n"


def line_plot(x, series, labels, *, title, xlabel, ylabel, note="",
              log_x=False, log_y=False, overlays=(), timestamp=None,
              width=640.0, height=420.0):
    group = chart_group(x, series, labels, title=title, xlabel=xlabel,
                        ylabel=ylabel, note=note, log_x=log_x, log_y=log_y,
                        overlays=overlays, width=width, height=height)
    return document([group], width=width, height=height, timestamp=timestamp)


def dashboard(panels, *, timestamp=None, panel_width=560.0,
              panel_height=380.0):
    """2 x 2 grid of prebuilt panel callables.

    Each entry is a callable taking (origin, width, height) and returning
    a <g> string, so the caller composes chart_group/bar_group freely.
    """
    positions = [(0.0, 0.0), (panel_width, 0.0),
                 (0.0, panel_height), (panel_width, panel_height)]
    groups = [make(origin, panel_width, panel_height)
              for make, origin in zip(panels, positions)]
    return document(groups, width=2 * panel_width,
                    height=2 * panel_height + 14, timestamp=timestamp)
