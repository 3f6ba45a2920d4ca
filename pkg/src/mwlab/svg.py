"""Deterministic SVG rendering of planar bodies: one polygon per body,
fixed viewport, body-id labels; byte-identical output for identical input."""

import numpy as np

from .bodies import promote
from .errors import DimensionMismatch

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
VIEW = 512  # viewport edge in user units


def _fmt(x):
    return format(x, ".6f")


def emit_svg(bodies, path, labels=None):
    """Write the bodies as polygons in a fixed square viewport."""
    bodies = list(bodies)
    if not bodies:
        raise ValueError("need at least one body")
    polys = []
    for b in bodies:
        if b.dim != 2:
            raise DimensionMismatch("svg rendering is a d=2 operation")
        polys.append(promote(b))
    radius = max(max(np.abs(p.verts).max() for p in polys), 1e-12)
    # Fixed viewport: the smallest power of two not below the data radius.
    extent = 2.0 ** np.ceil(np.log2(radius))
    s = VIEW / (2.0 * extent)

    def to_px(v):
        return (VIEW / 2.0 + s * v[0], VIEW / 2.0 - s * v[1])

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{VIEW}" height="{VIEW}" '
        f'viewBox="0 0 {VIEW} {VIEW}">',
        f'<rect width="{VIEW}" height="{VIEW}" fill="white"/>',
    ]
    for i, p in enumerate(polys):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in (to_px(v) for v in p.verts))
        label = str(i) if labels is None else str(labels[i])
        lines.append(
            f'<polygon points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        anchor = to_px(p.verts[0])
        lines.append(
            f'<text x="{_fmt(anchor[0])}" y="{_fmt(anchor[1])}" font-size="10" '
            f'fill="{color}">{label}</text>'
        )
    lines.append("</svg>")
    data = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(data)
    return data
