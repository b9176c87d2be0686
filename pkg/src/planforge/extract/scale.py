"""Pixel-to-feet scaling from dimension callouts, and the world transform.

Anisotropic least squares with regularization toward isotropy: each callout
contributes to sx or sy by its dominant axis after deskew; mixed-direction
callouts contribute to both by component. The world frame is y-up feet with
the deskew rotation applied before the (axis-aligned) scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import constants as C


class NoScaleAnnotation(ValueError):
    pass


@dataclass
class WorldTransform:
    phi: float            # skew angle removed (radians)
    sx: float             # feet per pixel after deskew
    sy: float
    dx: float = 0.0       # post-scale translation (feet)
    dy: float = 0.0

    def apply(self, x: float, y: float) -> tuple[float, float]:
        c, s = math.cos(-self.phi), math.sin(-self.phi)
        xr = x * c - y * s
        yr = x * s + y * c
        return (xr * self.sx + self.dx, yr * self.sy + self.dy)

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        c, s = math.cos(-self.phi), math.sin(-self.phi)
        xr = pts[:, 0] * c - pts[:, 1] * s
        yr = pts[:, 0] * s + pts[:, 1] * c
        return np.column_stack([xr * self.sx + self.dx, yr * self.sy + self.dy])


def estimate_scale(callouts: list[dict], phi: float,
                   assume_scale: float | None = None,
                   lam: float | None = None) -> tuple[float, float]:
    """(sx, sy) in feet/pixel; callout dicts carry p1, p2 (y-up px), length."""
    if not callouts:
        if assume_scale is not None:
            return (assume_scale, assume_scale)
        raise NoScaleAnnotation("no dimension callouts and no --assume-scale")
    if lam is None:
        lam = 10.0 * len(callouts)
    c, s = math.cos(-phi), math.sin(-phi)
    a11 = a22 = lam
    a12 = -lam
    b1 = b2 = 0.0
    for co in callouts:
        (x1, y1), (x2, y2) = co["p1"], co["p2"]
        vx, vy = x2 - x1, y2 - y1
        dx = abs(vx * c - vy * s)
        dy = abs(vx * s + vy * c)
        n = math.hypot(vx, vy)
        length = float(co["length"])
        if n < 1e-9 or length <= 0:
            continue
        if dx >= 3.0 * dy:
            a11 += n * n
            b1 += n * length
        elif dy >= 3.0 * dx:
            a22 += n * n
            b2 += n * length
        else:
            a11 += dx * dx
            b1 += dx * (length * dx / n)
            a22 += dy * dy
            b2 += dy * (length * dy / n)
    det = a11 * a22 - a12 * a12
    if abs(det) < 1e-12:
        raise NoScaleAnnotation("degenerate callout system")
    sx = (b1 * a22 - b2 * a12) / det
    sy = (a11 * b2 - a12 * b1) / det
    if sx <= 0 or sy <= 0:
        raise NoScaleAnnotation(f"non-positive scale ({sx:.4f}, {sy:.4f})")
    return (sx, sy)
