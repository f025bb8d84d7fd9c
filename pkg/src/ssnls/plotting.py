"""Self-contained SVG emission: line plots and exponent-region maps.

Hand-rolled on purpose: the artifacts must be byte-deterministic (no
renderer version strings, no timestamps) and viewable with nothing but a
browser.  Floats are formatted through one canonical "%.6g" so reruns
compare equal with cmp(1).
"""

from __future__ import annotations

import math

import numpy as np

from .propagator import admissible

_W, _H = 640.0, 420.0
_ML, _MR, _MT, _MB = 64.0, 16.0, 28.0, 44.0   # margins around the data box
_COLORS = ("#1f6fb2", "#c23b22", "#3a7d44", "#7b5aa6", "#b8860b", "#4a4a4a")


def _fmt(v: float) -> str:
    s = "%.6g" % float(v)
    return "0" if s in ("-0", "-0.0") else s


def _scale(lo: float, hi: float):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("plot limits must be finite")
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def _ticks(lo: float, hi: float, n: int = 5):
    return np.linspace(lo, hi, n)


def line_plot(xs, ys_list, labels=(), logy: bool = False,
              title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """One SVG document: shared x, one polyline per series.

    logy plots log10 of the values and drops nonpositive samples (a
    decaying series that has hit the roundoff floor would otherwise pin
    the axis at -inf); the y axis label gets a log10 prefix.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0 or not ys_list:
        raise ValueError("nothing to plot")
    series = []
    for ys in ys_list:
        ys = np.asarray(ys, dtype=float)
        if ys.shape != xs.shape:
            raise ValueError("series length does not match the x grid")
        if logy:
            keep = ys > 0.0
            series.append((xs[keep], np.log10(ys[keep])))
        else:
            series.append((xs, ys))
    if all(sx.size == 0 for sx, _ in series):
        raise ValueError("nothing to plot")
    x_lo, x_hi = _scale(float(xs.min()), float(xs.max()))
    y_all = np.concatenate([sy for _, sy in series if sy.size])
    y_lo, y_hi = _scale(float(y_all.min()), float(y_all.max()))

    def px(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(v):
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
           'viewBox="0 0 %d %d">' % (_W, _H, _W, _H),
           '<rect width="%d" height="%d" fill="white"/>' % (_W, _H),
           '<rect x="%s" y="%s" width="%s" height="%s" fill="none" '
           'stroke="black"/>' % (_fmt(_ML), _fmt(_MT), _fmt(_W - _ML - _MR),
                                 _fmt(_H - _MT - _MB))]
    for t in _ticks(x_lo, x_hi):
        out.append('<text x="%s" y="%s" font-size="11" text-anchor="middle">'
                   '%s</text>' % (_fmt(px(t)), _fmt(_H - _MB + 16.0), _fmt(t)))
    for t in _ticks(y_lo, y_hi):
        out.append('<text x="%s" y="%s" font-size="11" text-anchor="end">'
                   '%s</text>' % (_fmt(_ML - 6.0), _fmt(py(t) + 4.0), _fmt(t)))
    for k, (sx, sy) in enumerate(series):
        if sx.size == 0:
            continue
        pts = " ".join("%s,%s" % (_fmt(px(a)), _fmt(py(b)))
                       for a, b in zip(sx, sy))
        out.append('<polyline points="%s" fill="none" stroke="%s" '
                   'stroke-width="1.5"/>' % (pts, _COLORS[k % len(_COLORS)]))
        if k < len(labels):
            out.append('<text x="%s" y="%s" font-size="12" fill="%s">%s</text>'
                       % (_fmt(_W - _MR - 150.0), _fmt(_MT + 16.0 * (k + 1)),
                          _COLORS[k % len(_COLORS)], labels[k]))
    if title:
        out.append('<text x="%s" y="18" font-size="13" text-anchor="middle">'
                   '%s</text>' % (_fmt(_W / 2.0), title))
    if xlabel:
        out.append('<text x="%s" y="%s" font-size="12" text-anchor="middle">'
                   '%s</text>' % (_fmt(_W / 2.0), _fmt(_H - 8.0), xlabel))
    if ylabel:
        out.append('<text x="14" y="%s" font-size="12" text-anchor="middle" '
                   'transform="rotate(-90 14 %s)">%s</text>'
                   % (_fmt(_H / 2.0), _fmt(_H / 2.0),
                      ("log10 " + ylabel) if logy else ylabel))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _boundary_row(ip: float, d: int, iters: int = 48) -> float | None:
    """Smallest admissible 1/q on the row 1/p = ip, by bisection on the
    predicate itself (not on a re-derived formula, so the drawn boundary
    is the predicate's level set by construction).  None when the whole
    row is outside the region (happens for d = 3 past the endpoint)."""
    p = 1.0 / ip
    if not admissible(2.0, p, d):
        return None
    lo, hi = 0.0, 0.5                      # lo inadmissible, hi admissible
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid > 0.0 and admissible(1.0 / mid, p, d):
            hi = mid
        else:
            lo = mid
    return hi


def admissible_region_map(ds=(1, 2, 3), n_rows: int = 101) -> str:
    """Side-by-side exponent-region panels in the (1/q, 1/p) square.

    Each panel shades the admissible set for one dimension; the boundary
    polyline comes from per-row bisection of the membership predicate.
    """
    ds = tuple(ds)
    if not ds:
        raise ValueError("nothing to plot")
    panel_w, panel_h, gap = 300.0, 300.0, 40.0
    width = gap + len(ds) * (panel_w + gap)
    height = panel_h + 90.0
    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
           'viewBox="0 0 %d %d">' % (width, height, width, height),
           '<rect width="%d" height="%d" fill="white"/>' % (width, height)]
    # row centers in (0, 1/2): p finite and > 2; the isolated pair
    # (q, p) = (inf, 2) sits on the omitted top edge
    ips = 0.5 * (np.arange(1, n_rows + 1) - 0.5) / n_rows
    for k, d in enumerate(ds):
        x0 = gap + k * (panel_w + gap)
        y0 = 40.0

        def px(iq):
            return x0 + iq / 0.5 * panel_w

        def py(ip):
            return y0 + panel_h - ip / 0.5 * panel_h

        boundary = []
        for ip in ips:
            iq = _boundary_row(float(ip), d)
            if iq is not None:
                boundary.append((iq, float(ip)))
        if boundary:
            poly = ["%s,%s" % (_fmt(px(0.5)), _fmt(py(boundary[0][1]))),
                    "%s,%s" % (_fmt(px(0.5)), _fmt(py(boundary[-1][1])))]
            poly += ["%s,%s" % (_fmt(px(iq)), _fmt(py(ip)))
                     for iq, ip in reversed(boundary)]
            out.append('<polygon points="%s" fill="#bcd5ea" stroke="none"/>'
                       % " ".join(poly))
            line = " ".join("%s,%s" % (_fmt(px(iq)), _fmt(py(ip)))
                            for iq, ip in boundary)
            out.append('<polyline points="%s" fill="none" stroke="#1f6fb2" '
                       'stroke-width="1.5"/>' % line)
        out.append('<rect x="%s" y="%s" width="%s" height="%s" fill="none" '
                   'stroke="black"/>' % (_fmt(x0), _fmt(y0), _fmt(panel_w),
                                         _fmt(panel_h)))
        out.append('<text x="%s" y="%s" font-size="13" text-anchor="middle">'
                   'd = %d</text>' % (_fmt(x0 + panel_w / 2.0), _fmt(y0 - 10.0), d))
        out.append('<text x="%s" y="%s" font-size="12" text-anchor="middle">'
                   '1/q</text>' % (_fmt(x0 + panel_w / 2.0), _fmt(y0 + panel_h + 30.0)))
        out.append('<text x="%s" y="%s" font-size="12" text-anchor="middle" '
                   'transform="rotate(-90 %s %s)">1/p</text>'
                   % (_fmt(x0 - 20.0), _fmt(y0 + panel_h / 2.0),
                      _fmt(x0 - 20.0), _fmt(y0 + panel_h / 2.0)))
        for v, lab in ((0.0, "0"), (0.5, "1/2")):
            out.append('<text x="%s" y="%s" font-size="10" text-anchor="middle">'
                       '%s</text>' % (_fmt(px(v)), _fmt(y0 + panel_h + 14.0), lab))
            out.append('<text x="%s" y="%s" font-size="10" text-anchor="end">'
                       '%s</text>' % (_fmt(x0 - 4.0), _fmt(py(v) + 3.0), lab))
    out.append("</svg>")
    return "\n".join(out) + "\n"
