"""Opening placement from structured label marks and door swing arcs.

Hosts are chosen by nearest adjacency with tangent consistency; line hosts
project orthogonally, arc hosts use tangent chords. Widths come from hints or
class defaults clamped to class ranges; end margins and pairwise spacing are
enforced by trimming then relocating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import constants as C
from ..geometry import (ArcWall, CollinearPoints, LineWall, Opening, Point2,
                        Wall, arc_from_3pt, wall_length, wall_point_at,
                        wall_tangent_at)


@dataclass
class LabelMark:
    p: Point2
    cls: str                   # door | window | room
    width_hint: float | None = None


def _distance_and_param(wall: Wall, p: Point2) -> tuple[float, float]:
    length = wall_length(wall)
    if isinstance(wall, LineWall):
        if length < 1e-9:
            return (p.dist(wall.start), 0.0)
        ux = (wall.end.x - wall.start.x) / length
        uy = (wall.end.y - wall.start.y) / length
        t = (p.x - wall.start.x) * ux + (p.y - wall.start.y) * uy
        t = min(max(t, 0.0), length)
        q = Point2(wall.start.x + t * ux, wall.start.y + t * uy)
        return (p.dist(q), t)
    ang = math.atan2(p.y - wall.center.y, p.x - wall.center.x)
    rel = (ang - wall.start_angle) * (1.0 if wall.ccw else -1.0)
    rel = rel % (2 * math.pi)
    if rel > wall.sweep:
        d_start, d_end = p.dist(wall.start), p.dist(wall.end)
        return (d_start, 0.0) if d_start <= d_end else (d_end, length)
    t = rel * wall.radius
    return (abs(p.dist(wall.center) - wall.radius), t)


def _nearest_host(walls: list[Wall], p: Point2,
                  radius: float = C.OPENING_HOST_RADIUS
                  ) -> tuple[Wall, float] | None:
    best = None
    for w in walls:
        if wall_length(w) < 2 * C.OPENING_END_MARGIN + 1.0:
            continue  # too short to host anything
        d, t = _distance_and_param(w, p)
        if d <= radius and (best is None or d < best[0]):
            best = (d, w, t)
    if best is None:
        return None
    return best[1], best[2]


def _clamp_width(cls: str, width: float | None) -> float:
    lo, hi = C.DOOR_WIDTH_RANGE if cls == "door" else C.WINDOW_WIDTH_RANGE
    default = C.DOOR_WIDTH_DEFAULT if cls == "door" else C.WINDOW_WIDTH_DEFAULT
    if width is None:
        return default
    return min(max(width, lo), hi)


def swing_to_mark(swing: list[Point2]) -> LabelMark | None:
    """A door swing arc: center is the hinge, radius approximates the width."""
    if len(swing) < 3:
        return None
    try:
        geom = arc_from_3pt(swing[0], swing[len(swing) // 2], swing[-1])
    except CollinearPoints:
        return None
    return LabelMark(geom.center, "door", width_hint=geom.radius)


def place_openings(labels: list[LabelMark], swings: list[list[Point2]],
                   walls: list[Wall]) -> tuple[list[Opening], list[str]]:
    """Openings with enforced margins/spacing, plus placement warnings."""
    log: list[str] = []
    marks: list[LabelMark] = [m for m in labels if m.cls in ("door", "window")]
    for swing in swings:
        mark = swing_to_mark(swing)
        if mark is not None:
            marks.append(mark)
        else:
            log.append("openings: degenerate swing arc ignored")

    placed: list[Opening] = []
    counter = {"door": 0, "window": 0}
    for mark in sorted(marks, key=lambda m: (m.cls, round(m.p.x, 3),
                                             round(m.p.y, 3))):
        hit = _nearest_host(walls, mark.p)
        if hit is None:
            log.append(f"openings: no host within {C.OPENING_HOST_RADIUS} ft of "
                       f"({mark.p.x:.2f},{mark.p.y:.2f}); {mark.cls} dropped")
            continue
        host, t = hit
        width = _clamp_width(mark.cls, mark.width_hint)
        counter[mark.cls] += 1
        prefix = "door" if mark.cls == "door" else "win"
        placed.append(Opening(f"tmp_{prefix}{counter[mark.cls]}", mark.cls,
                              host.id, t, width,
                              C.DEFAULT_DOOR_HEIGHT if mark.cls == "door"
                              else C.DEFAULT_WINDOW_HEIGHT,
                              None if mark.cls == "door"
                              else C.DEFAULT_WINDOW_SILL))

    placed, spacing_log = enforce_margins_and_spacing(placed, walls)
    log.extend(spacing_log)
    return placed, log


def enforce_margins_and_spacing(openings: list[Opening], walls: list[Wall]
                                ) -> tuple[list[Opening], list[str]]:
    log: list[str] = []
    by_host: dict[str, list[Opening]] = {}
    wall_of = {w.id: w for w in walls}
    for o in openings:
        by_host.setdefault(o.host, []).append(o)
    kept: list[Opening] = []
    for host_id in sorted(by_host):
        host = wall_of[host_id]
        length = wall_length(host)
        members = sorted(by_host[host_id], key=lambda o: (o.offset, o.id))
        # trim widths first when the wall is crowded
        need = (sum(o.width for o in members)
                + C.OPENING_SPACING * (len(members) - 1)
                + 2 * C.OPENING_END_MARGIN)
        if need > length:
            for o in members:
                lo, _ = (C.DOOR_WIDTH_RANGE if o.cls == "door"
                         else C.WINDOW_WIDTH_RANGE)
                if o.width > lo:
                    log.append(f"openings: {o.id} trimmed to {lo} ft on {host_id}")
                    o.width = lo
        cursor = C.OPENING_END_MARGIN
        survivors = []
        for o in members:
            lo_off = C.OPENING_END_MARGIN + o.width / 2.0
            hi_off = length - C.OPENING_END_MARGIN - o.width / 2.0
            if lo_off > hi_off:
                log.append(f"openings: {o.id} cannot fit on {host_id}; dropped")
                continue
            desired = min(max(o.offset, lo_off), hi_off)
            pos = max(desired, cursor + o.width / 2.0)
            if pos > hi_off + 1e-9:
                # relocate the chain back toward the wall center
                overrun = pos - hi_off
                pos = hi_off
                for prev in reversed(survivors):
                    want_gap = (pos - o.width / 2.0) - (prev.offset
                                                        + prev.width / 2.0)
                    if want_gap >= C.OPENING_SPACING:
                        break
                    prev_lo = C.OPENING_END_MARGIN + prev.width / 2.0
                    prev.offset = max(prev_lo,
                                      round(prev.offset - overrun, 4))
                want_gap = ((pos - o.width / 2.0)
                            - (survivors[-1].offset + survivors[-1].width / 2.0)
                            if survivors else C.OPENING_SPACING)
                if want_gap < C.OPENING_SPACING - 1e-6:
                    log.append(f"openings: {o.id} cannot be spaced on "
                               f"{host_id}; dropped")
                    continue
            if abs(pos - o.offset) > 1e-9:
                log.append(f"openings: {o.id} relocated to offset {pos:.2f} "
                           f"on {host_id}")
            o.offset = round(pos, 4)
            cursor = o.offset + o.width / 2.0 + C.OPENING_SPACING
            survivors.append(o)
        kept.extend(survivors)
    return kept, log
