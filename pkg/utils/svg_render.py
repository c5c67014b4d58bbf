"""
Static SVG rendering of sampled curves.

One <path> per curve piece, circle markers at the two endpoints of every
curve, a viewBox padded by 5% of the larger extent, and the y axis flipped
so curves appear with the mathematical orientation.
"""

import logging
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from utils.curves import ArcCurve
from utils.errors import DomainError

logger = logging.getLogger(__name__)

PADDING = 0.05
PIECE_COLORS = {
    "segment": "#444444",
    "loop": "#1f77b4",
    "half_loop": "#1f77b4",
    "wavelike": "#d62728",
}

PREAMBLE = """\
<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1"
    width="%(width_px)d" height="%(height_px)d"
    viewBox="%(min_x).17g %(min_y).17g %(width).17g %(height).17g">
<g fill="none" stroke-linecap="round" stroke-linejoin="round">
"""

POSTAMBLE = """\
</g>
</svg>
"""

PATH = '<path d="%(d)s" stroke="%(color)s" stroke-width="%(stroke).6g" data-kind="%(kind)s"/>'
MARKER = '<circle cx="%(x).17g" cy="%(y).17g" r="%(radius).6g" fill="%(color)s" stroke="none"/>'


class SVG:
    def __init__(self):
        self.min_x = None
        self.max_x = None
        self.min_y = None
        self.max_y = None
        self.paths = []
        self.markers = []

    def require(self, xs: np.ndarray, ys: np.ndarray):
        lo_x, hi_x = float(np.min(xs)), float(np.max(xs))
        lo_y, hi_y = float(np.min(ys)), float(np.max(ys))
        if self.min_x is None:
            self.min_x, self.max_x, self.min_y, self.max_y = lo_x, hi_x, lo_y, hi_y
        else:
            self.min_x = min(self.min_x, lo_x)
            self.max_x = max(self.max_x, hi_x)
            self.min_y = min(self.min_y, lo_y)
            self.max_y = max(self.max_y, hi_y)

    @property
    def extent(self) -> float:
        return max(self.max_x - self.min_x, self.max_y - self.min_y, 1e-12)

    def path(self, xs: np.ndarray, ys: np.ndarray, kind: str):
        # y is flipped at render time
        self.require(xs, -ys)
        self.paths.append((kind, xs, -ys))

    def marker(self, x: float, y: float, color: str = "#000000"):
        self.require(np.array([x]), np.array([-y]))
        self.markers.append((x, -y, color))

    def render(self) -> str:
        if self.min_x is None:
            raise DomainError("nothing to render")
        extent = self.extent
        pad = PADDING * extent
        min_x, min_y = self.min_x - pad, self.min_y - pad
        width = self.max_x - self.min_x + 2 * pad
        height = self.max_y - self.min_y + 2 * pad
        width_px = max(1, int(round(800 * width / max(width, height))))
        height_px = max(1, int(round(800 * height / max(width, height))))
        stroke = 0.004 * extent
        radius = 0.01 * extent

        lines = [PREAMBLE % locals()]
        for kind, xs, ys in self.paths:
            d = "M " + " L ".join(f"{x:.17g},{y:.17g}" for x, y in zip(xs, ys))
            color = PIECE_COLORS.get(kind, "#000000")
            lines.append(PATH % locals() + "\n")
        for x, y, color in self.markers:
            lines.append(MARKER % locals() + "\n")
        lines.append(POSTAMBLE)
        return "".join(lines)


def render_svg(curves: Union[ArcCurve, Sequence[ArcCurve]], path: Union[str, Path]) -> Path:
    """Write the curves as a static SVG file and return its path."""
    if isinstance(curves, ArcCurve):
        curves = [curves]
    svg = SVG()
    for curve in curves:
        for piece, sl in curve.piece_slices():
            svg.path(curve.x[sl], curve.y[sl], piece.kind)
        svg.marker(float(curve.x[0]), float(curve.y[0]), "#2ca02c")
        svg.marker(float(curve.x[-1]), float(curve.y[-1]), "#000000")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg.render())
    logger.info(f"SVG with {len(svg.paths)} paths saved to {path}")
    return path
