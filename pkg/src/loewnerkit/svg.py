"""Static SVG plots of curves and driving terms.

Structure (version 1): one ``<rect>`` axis box, an optional ``<line>`` for the
real axis, then one ``<polyline>`` per series.  The root element carries
``data-format="loewnerkit-svg/1"``.
"""

from xml.sax.saxutils import quoteattr

import numpy as np

__all__ = ["svg_polylines", "write_svg"]

FORMAT = "loewnerkit-svg/1"
COLORS = ("#1f4e99", "#b5331f", "#2b7a3d", "#7a4a9c")


def svg_polylines(series, width=480, height=360, margin=24, title="", real_axis=True,
                  equal_aspect=True):
    """SVG text for a list of complex point arrays drawn in data coordinates."""
    pts = [np.asarray(s, dtype=complex).ravel() for s in series]
    allp = np.concatenate(pts) if pts else np.zeros(1, dtype=complex)
    x0, x1 = float(allp.real.min()), float(allp.real.max())
    y0, y1 = float(allp.imag.min()), float(allp.imag.max())
    if real_axis:
        y0 = min(y0, 0.0)
    dx = max(x1 - x0, 1e-12)
    dy = max(y1 - y0, 1e-12)
    w = width - 2 * margin
    h = height - 2 * margin
    sx, sy = w / dx, h / dy
    if equal_aspect:
        sx = sy = min(sx, sy)

    def px(z):
        return margin + (z.real - x0) * sx, height - margin - (z.imag - y0) * sy

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" data-format="{FORMAT}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<rect x="{margin}" y="{margin}" width="{w}" height="{h}" '
               'fill="none" stroke="#888" stroke-width="1"/>')
    if real_axis and y0 <= 0.0 <= y1:
        _, ya = px(complex(x0, 0.0))
        out.append(f'<line x1="{margin}" y1="{ya:.3f}" x2="{margin + w}" y2="{ya:.3f}" '
                   'stroke="#444" stroke-width="0.8"/>')
    for k, p in enumerate(pts):
        xs, ys = px(p)
        coords = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(xs, ys))
        out.append(f'<polyline points={quoteattr(coords)} fill="none" '
                   f'stroke="{COLORS[k % len(COLORS)]}" stroke-width="1.2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, **kw):
    with open(path, "w") as fh:
        fh.write(svg_polylines(series, **kw))
