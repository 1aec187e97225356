"""Minimal deterministic SVG output for planar regions and fields."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import HPolyhedron, clip_polygon

_PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666")


def _f(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".") if abs(v) >= 5e-4 else "0"


@dataclass
class SvgCanvas:
    view: tuple[float, float, float, float]
    size: int = 480
    items: list[str] = field(default_factory=list)

    def to_px(self, p: Sequence[float]) -> tuple[float, float]:
        x0, y0, x1, y1 = self.view
        sx = self.size / (x1 - x0)
        sy = self.size / (y1 - y0)
        return (p[0] - x0) * sx, (y1 - p[1]) * sy

    def _on_border(self, P, Q, eps: float = 1e-9) -> bool:
        x0, y0, x1, y1 = self.view
        for k, lim in ((0, x0), (0, x1), (1, y0), (1, y1)):
            if abs(P[k] - lim) <= eps and abs(Q[k] - lim) <= eps:
                return True
        return False

    def region(self, H: HPolyhedron, color: str, opacity: float = 0.25) -> None:
        """Fill ``H`` clipped to the view; clipped edges are dashed."""
        verts = clip_polygon(H, self.view)
        if len(verts) < 3:
            return
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in (self.to_px(v) for v in verts))
        self.items.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="{opacity}" stroke="none"/>')
        for P, Q in zip(verts, np.roll(verts, -1, axis=0)):
            (a, b), (c, d) = self.to_px(P), self.to_px(Q)
            dash = ' stroke-dasharray="4 3"' if self._on_border(P, Q) else ""
            self.items.append(
                f'<line x1="{_f(a)}" y1="{_f(b)}" x2="{_f(c)}" y2="{_f(d)}" stroke="{color}" stroke-width="1.2"{dash}/>'
            )

    def arrow(self, p: Sequence[float], v: Sequence[float], length: float, color: str = "#333333") -> None:
        a, b = self.to_px(p)
        tip = np.asarray(p, dtype=float) + length * np.asarray(v, dtype=float)
        c, d = self.to_px(tip)
        self.items.append(
            f'<line x1="{_f(a)}" y1="{_f(b)}" x2="{_f(c)}" y2="{_f(d)}" stroke="{color}" stroke-width="0.8" marker-end="url(#tip)"/>'
        )

    def dot(self, p: Sequence[float], color: str = "#000000", r: float = 1.5) -> None:
        a, b = self.to_px(p)
        self.items.append(f'<circle cx="{_f(a)}" cy="{_f(b)}" r="{_f(r)}" fill="{color}"/>')

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
            f'viewBox="0 0 {self.size} {self.size}">\n'
            '<defs><marker id="tip" viewBox="0 0 6 6" refX="5" refY="3" markerWidth="4" markerHeight="4" '
            'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#333333"/></marker></defs>\n'
            f'<rect width="{self.size}" height="{self.size}" fill="white"/>\n'
        )
        return head + "\n".join(self.items) + "\n</svg>\n"


def palette(k: int) -> str:
    return _PALETTE[k % len(_PALETTE)]


def regions_svg(regions: Sequence[HPolyhedron], view, size: int = 480) -> str:
    """Nested regions drawn from the largest down so smaller ones stay visible."""
    canvas = SvgCanvas(tuple(view), size)
    for k in reversed(range(len(regions))):
        canvas.region(regions[k], palette(k))
    return canvas.render()
