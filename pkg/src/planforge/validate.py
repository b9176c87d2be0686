"""Strict schema + topology validation with a suggested-fix and auto-repair catalog.

validate() is pure: identical input gives an identical report, violations
ordered by element id then code. auto_repair() applies the deterministic fix
catalog (geometry repairs, then opening repairs, then precision rounding) and
never introduces a violation class absent from the input report.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

from . import constants as C
from .geometry import (ArcWall, Layout, LineWall, Opening, Point2, Room, Wall,
                       signed_area, wall_length, wall_point_at)

CODES = (
    "SCHEMA", "DUP_ID", "ZERO_LEN", "FULL_CIRCLE", "COLLINEAR_ARC3PT",
    "OPENING_OFF_WALL", "OPENING_END_MARGIN", "OPENING_OVERLAP",
    "OPENING_CROSSES_VERTEX", "MISSING_HOST", "ROOM_NOT_CLOSED", "ROOM_CW",
    "ROOM_SELF_X", "ROOM_NONPOS_AREA", "DANGLING_ENDPOINT", "EXCESS_PRECISION",
)


@dataclass
class Violation:
    code: str
    elements: list[str]
    message: str
    suggested_fix: dict | None = None

    def to_doc(self) -> dict:
        doc = {"code": self.code, "elements": list(self.elements),
               "message": self.message}
        if self.suggested_fix is not None:
            doc["suggested_fix"] = self.suggested_fix
        return doc


@dataclass
class ValidationReport:
    passes: bool
    violations: list[Violation] = field(default_factory=list)

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def to_doc(self) -> dict:
        return {"passes": self.passes,
                "violations": [v.to_doc() for v in self.violations]}


def _margins(host: Wall, width: float) -> tuple[float, float]:
    length = wall_length(host)
    return (C.OPENING_END_MARGIN + width / 2.0,
            length - C.OPENING_END_MARGIN - width / 2.0)


def _precision_ok(value: float, decimals: int) -> bool:
    scaled = value * (10 ** decimals)
    return abs(scaled - round(scaled)) < 1e-6


def _ring_is_simple(poly: list[Point2]) -> bool:
    n = len(poly)
    for i in range(n):
        a1, a2 = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            b1, b2 = poly[j], poly[(j + 1) % n]
            if _segments_cross(a1, a2, b1, b2):
                return False
    return True


def _segments_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
        return 0 if abs(v) < 1e-12 else (1 if v > 0 else -1)
    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def _endpoint_connected(p: Point2, wall: Wall, layout: Layout) -> bool:
    for other in layout.walls:
        if other is wall:
            continue
        if _on_wall_curve(p, other, C.CONNECT_TOL):
            return True
    return False


def _on_wall_curve(p: Point2, wall: Wall, tol: float) -> bool:
    if isinstance(wall, LineWall):
        length = wall.start.dist(wall.end)
        if length == 0:
            return p.dist(wall.start) <= tol
        ux = (wall.end.x - wall.start.x) / length
        uy = (wall.end.y - wall.start.y) / length
        s = (p.x - wall.start.x) * ux + (p.y - wall.start.y) * uy
        s = min(max(s, 0.0), length)
        q = Point2(wall.start.x + ux * s, wall.start.y + uy * s)
        return p.dist(q) <= tol
    ang = math.atan2(p.y - wall.center.y, p.x - wall.center.x)
    rel = (ang - wall.start_angle) * (1.0 if wall.ccw else -1.0)
    rel = rel % (2 * math.pi)
    slack = tol / max(wall.radius, tol)
    if rel > wall.sweep + slack and rel < 2 * math.pi - slack:
        return min(p.dist(wall.start), p.dist(wall.end)) <= tol
    return abs(p.dist(wall.center) - wall.radius) <= tol


def connectivity_check(layout: Layout) -> list[tuple[str, str, Point2]]:
    """All unconnected wall endpoints as (wall_id, which_end, point)."""
    dangles = []
    for w in layout.walls:
        if wall_length(w) <= 1e-9:
            continue
        for name, p in (("start", w.start), ("end", w.end)):
            if not _endpoint_connected(p, w, layout):
                dangles.append((w.id, name, p))
    return dangles


def validate(layout: Layout) -> ValidationReport:
    v: list[Violation] = []

    # schema-level: ids present, classes sane, hosts resolvable checked below
    for w in layout.walls:
        if not w.id:
            v.append(Violation("SCHEMA", [], "wall with empty id"))
    for o in layout.openings():
        if not o.id:
            v.append(Violation("SCHEMA", [], "opening with empty id"))
        if o.width <= 0 or o.height <= 0:
            v.append(Violation("SCHEMA", [o.id], f"{o.id}: non-positive size"))
        if not math.isfinite(o.offset):
            v.append(Violation("SCHEMA", [o.id], f"{o.id}: offset not finite"))
    for r in layout.rooms:
        if len(r.polygon) < 3:
            v.append(Violation("SCHEMA", [r.id],
                               f"{r.id}: polygon needs at least 3 vertices"))
        if len(r.polygon) >= 2 and r.polygon[0].dist(r.polygon[-1]) < 1e-12:
            v.append(Violation("SCHEMA", [r.id],
                               f"{r.id}: first vertex repeated at end"))
    if layout.units != "feet":
        v.append(Violation("SCHEMA", [], f"units must be 'feet', got {layout.units!r}"))

    # id uniqueness
    seen: dict[str, int] = {}
    for eid in layout.element_ids():
        seen[eid] = seen.get(eid, 0) + 1
    for eid, count in sorted(seen.items()):
        if eid and count > 1:
            v.append(Violation("DUP_ID", [eid], f"id {eid} used {count} times",
                               {"action": "rename_duplicates"}))

    # wall geometry
    for w in layout.walls:
        if isinstance(w, LineWall):
            if wall_length(w) <= 1e-9:
                v.append(Violation("ZERO_LEN", [w.id], f"{w.id}: zero length"))
        else:
            if w.radius <= 1e-9:
                v.append(Violation("ZERO_LEN", [w.id], f"{w.id}: zero radius"))
            if w.sweep <= 1e-9 or w.sweep >= 2 * math.pi - 1e-9:
                v.append(Violation("FULL_CIRCLE", [w.id],
                                   f"{w.id}: sweep {w.sweep:.6f} outside (0, 2pi)"))

    # arc3pt ingest notes
    for wid, tag, detail in layout.ingest_notes:
        if tag in ("arc3pt_collinear", "arc3pt_near_collinear"):
            v.append(Violation("COLLINEAR_ARC3PT", [wid],
                               f"{wid}: arc3pt points nearly collinear "
                               f"(sagitta {detail:.4f})",
                               {"action": "refit_as_line"}))

    # openings
    hosts = {w.id: w for w in layout.walls}
    per_host: dict[str, list[Opening]] = {}
    for o in layout.openings():
        host = hosts.get(o.host)
        if host is None:
            v.append(Violation("MISSING_HOST", [o.id],
                               f"{o.id}: host {o.host!r} not found",
                               {"action": "attach_nearest_wall"}))
            continue
        per_host.setdefault(o.host, []).append(o)
        length = wall_length(host)
        if length <= 1e-9:
            continue
        half = o.width / 2.0
        lo, hi = o.offset - half, o.offset + half
        eps = 1e-6
        if o.offset < -eps or o.offset > length + eps:
            # anchor point itself is off the host
            over = max(-o.offset, o.offset - length)
            fix_lo, fix_hi = _margins(host, o.width)
            v.append(Violation("OPENING_OFF_WALL", [o.id],
                               f"{o.id}: center {over:.2f} ft off {o.host}",
                               {"action": "relocate",
                                "offset": round(min(max(o.offset, fix_lo), fix_hi), 2)}))
        elif lo < C.OPENING_END_MARGIN - eps or hi > length - C.OPENING_END_MARGIN + eps:
            fix_lo, fix_hi = _margins(host, o.width)
            v.append(Violation("OPENING_END_MARGIN", [o.id],
                               f"{o.id}: end margin below {C.OPENING_END_MARGIN} ft",
                               {"action": "relocate",
                                "offset": round(min(max(o.offset, fix_lo), fix_hi), 2)}))
        # openings may not cross interior junction points of the host
        for other in layout.walls:
            if other is host or wall_length(other) <= 1e-9:
                continue
            for p in (other.start, other.end):
                s = _param_on(host, p)
                if s is None:
                    continue
                if s < C.CONNECT_TOL or s > length - C.CONNECT_TOL:
                    continue
                if lo + eps < s < hi - eps:
                    v.append(Violation("OPENING_CROSSES_VERTEX", [o.id],
                                       f"{o.id}: crosses junction at offset {s:.2f} "
                                       f"on {o.host}",
                                       {"action": "shift_clear", "junction": round(s, 2)}))
                    break
            else:
                continue
            break

    # pairwise spacing per host
    for host_id, members in sorted(per_host.items()):
        members = sorted(members, key=lambda o: (o.offset, o.id))
        for a, b in zip(members, members[1:]):
            gap = (b.offset - b.width / 2.0) - (a.offset + a.width / 2.0)
            if gap < C.OPENING_SPACING - 1e-6:
                v.append(Violation("OPENING_OVERLAP", [a.id, b.id],
                                   f"{a.id} and {b.id} closer than "
                                   f"{C.OPENING_SPACING} ft on {host_id}",
                                   {"action": "separate_or_merge"}))

    # rooms
    for r in layout.rooms:
        poly = r.polygon
        if len(poly) < 3:
            continue
        # attempted closure: trailing vertex nearly repeats the first
        if poly[0].dist(poly[-1]) > 1e-12 and poly[0].dist(poly[-1]) <= C.CONNECT_TOL:
            v.append(Violation("ROOM_NOT_CLOSED", [r.id],
                               f"{r.id}: ring endpoint gap "
                               f"{poly[0].dist(poly[-1]):.3f} ft",
                               {"action": "snap_ring"}))
            poly = poly[:-1]
            if len(poly) < 3:
                continue
        area = signed_area(poly)
        if abs(area) < 1e-9:
            v.append(Violation("ROOM_NONPOS_AREA", [r.id],
                               f"{r.id}: degenerate area", {"action": "drop_room"}))
        elif area < 0:
            v.append(Violation("ROOM_CW", [r.id],
                               f"{r.id}: clockwise polygon (area {area:.2f})",
                               {"action": "reverse_polygon"}))
        if not _ring_is_simple(poly):
            v.append(Violation("ROOM_SELF_X", [r.id],
                               f"{r.id}: self-intersecting polygon"))
        for wid in r.wall_chain:
            if wid not in hosts:
                v.append(Violation("SCHEMA", [r.id],
                                   f"{r.id}: wall_chain references unknown {wid!r}"))

    # endpoint connectivity
    if len(layout.walls) > 1:
        for wid, which, p in connectivity_check(layout):
            v.append(Violation("DANGLING_ENDPOINT", [wid],
                               f"{wid}: {which} endpoint ({p.x:.2f},{p.y:.2f}) "
                               f"connects to nothing"))

    # coordinate precision
    imprecise: list[str] = []
    for w in layout.walls:
        coords = ([w.start.x, w.start.y, w.end.x, w.end.y, w.thickness, w.height]
                  if isinstance(w, LineWall)
                  else [w.center.x, w.center.y, w.radius, w.thickness, w.height])
        if not all(_precision_ok(c, C.COORD_DECIMALS) for c in coords):
            imprecise.append(w.id)
    for o in layout.openings():
        vals = [o.offset, o.width, o.height] + ([o.sill] if o.sill is not None else [])
        if not all(_precision_ok(c, C.COORD_DECIMALS) for c in vals):
            imprecise.append(o.id)
    for r in layout.rooms:
        if not all(_precision_ok(p.x, C.COORD_DECIMALS)
                   and _precision_ok(p.y, C.COORD_DECIMALS) for p in r.polygon):
            imprecise.append(r.id)
    for eid in imprecise:
        v.append(Violation("EXCESS_PRECISION", [eid],
                           f"{eid}: coordinates finer than 0.01 ft",
                           {"action": "round_coordinates"}))

    v.sort(key=lambda x: (x.elements[0] if x.elements else "", x.code))
    return ValidationReport(passes=not v, violations=v)


def _param_on(wall: Wall, p: Point2) -> float | None:
    """Arc-length of p along the wall if p lies on it (CONNECT_TOL band)."""
    if isinstance(wall, LineWall):
        length = wall.start.dist(wall.end)
        if length == 0:
            return None
        ux = (wall.end.x - wall.start.x) / length
        uy = (wall.end.y - wall.start.y) / length
        s = (p.x - wall.start.x) * ux + (p.y - wall.start.y) * uy
        if s < -C.CONNECT_TOL or s > length + C.CONNECT_TOL:
            return None
        q = Point2(wall.start.x + ux * min(max(s, 0), length),
                   wall.start.y + uy * min(max(s, 0), length))
        if p.dist(q) > C.CONNECT_TOL:
            return None
        return min(max(s, 0.0), length)
    if abs(p.dist(wall.center) - wall.radius) > C.CONNECT_TOL:
        return None
    ang = math.atan2(p.y - wall.center.y, p.x - wall.center.x)
    rel = (ang - wall.start_angle) * (1.0 if wall.ccw else -1.0)
    rel = rel % (2 * math.pi)
    if rel > wall.sweep:
        return None
    return rel * wall.radius


# ---------------------------------------------------------------------------
# Auto repair
# ---------------------------------------------------------------------------

def auto_repair(layout: Layout, report: ValidationReport) -> Layout:
    """Best-effort deterministic repairs; unrepairable violations persist.

    Order: geometry repairs, then opening repairs, then precision rounding;
    iterated to a fixed point of at most AUTO_REPAIR_MAX_PASSES passes.
    """
    lay = copy.deepcopy(layout)
    current = report
    for _ in range(C.AUTO_REPAIR_MAX_PASSES):
        if current.passes:
            break
        changed = _repair_pass(lay, current)
        current = validate(lay)
        if not changed:
            break
    return lay


def _repair_pass(lay: Layout, report: ValidationReport) -> bool:
    changed = False
    hosts = {w.id: w for w in lay.walls}

    for viol in report.violations:
        if viol.code == "COLLINEAR_ARC3PT":
            # replace the annotated wall's note; geometry is already a line
            lay.ingest_notes = [n for n in lay.ingest_notes
                                if n[0] not in viol.elements]
            for wid in viol.elements:
                w = hosts.get(wid)
                if isinstance(w, ArcWall):
                    hosts[wid] = LineWall(w.id, w.start, w.end, w.thickness, w.height)
                    lay.walls[lay.walls.index(w)] = hosts[wid]
            changed = True
        elif viol.code == "DUP_ID":
            changed |= _rename_duplicates(lay, viol.elements[0])
        elif viol.code == "ROOM_CW":
            for r in lay.rooms:
                if r.id in viol.elements:
                    r.polygon.reverse()
                    changed = True
        elif viol.code == "ROOM_NOT_CLOSED":
            for r in lay.rooms:
                if r.id in viol.elements and len(r.polygon) >= 2:
                    r.polygon.pop()
                    changed = True
        elif viol.code == "ROOM_NONPOS_AREA":
            before = len(lay.rooms)
            lay.rooms = [r for r in lay.rooms if r.id not in viol.elements]
            changed |= len(lay.rooms) != before
        elif viol.code in ("OPENING_OFF_WALL", "OPENING_END_MARGIN"):
            for o in lay.openings():
                if o.id in viol.elements:
                    host = hosts.get(o.host)
                    if host is None:
                        continue
                    lo, hi = _margins(host, o.width)
                    if lo > hi:
                        continue  # wall too short to host legally
                    o.offset = round(min(max(o.offset, lo), hi), 2)
                    changed = True
        elif viol.code == "OPENING_CROSSES_VERTEX":
            changed |= _shift_clear_of_junction(lay, viol)
        elif viol.code == "MISSING_HOST":
            changed |= _attach_to_some_wall(lay, viol.elements)
        elif viol.code == "EXCESS_PRECISION":
            changed |= _round_everything(lay, viol.elements)

    # opening overlaps are resolved per host after individual fixes
    overlap = [v for v in report.violations if v.code == "OPENING_OVERLAP"]
    if overlap:
        changed |= _resolve_overlaps(lay)
    return changed


def _rename_duplicates(lay: Layout, dup_id: str) -> bool:
    taken = set(lay.element_ids())
    def fresh(prefix: str) -> str:
        n = 1
        while f"{prefix}{n}" in taken:
            n += 1
        taken.add(f"{prefix}{n}")
        return f"{prefix}{n}"
    found = False
    changed = False
    collections = ([(w, "wall") for w in lay.walls]
                   + [(o, "door") for o in lay.doors]
                   + [(o, "win") for o in lay.windows]
                   + [(r, "room") for r in lay.rooms])
    for obj, prefix in collections:
        if obj.id == dup_id:
            if not found:
                found = True
            else:
                obj.id = fresh(prefix)
                changed = True
    return changed


def _shift_clear_of_junction(lay: Layout, viol: Violation) -> bool:
    changed = False
    hosts = {w.id: w for w in lay.walls}
    junction = (viol.suggested_fix or {}).get("junction")
    for o in lay.openings():
        if o.id not in viol.elements or junction is None:
            continue
        host = hosts.get(o.host)
        if host is None:
            continue
        lo, hi = _margins(host, o.width)
        clear = C.CONNECT_TOL + 1e-3
        left = junction - o.width / 2.0 - clear
        right = junction + o.width / 2.0 + clear
        candidates = [c for c in (left, right) if lo <= c <= hi]
        if candidates:
            o.offset = round(min(candidates, key=lambda c: abs(c - o.offset)), 2)
            changed = True
        elif o.width > min(*_class_range(o.cls)):
            o.width = min(*_class_range(o.cls))
            changed = True
    return changed


def _class_range(cls: str) -> tuple[float, float]:
    return C.DOOR_WIDTH_RANGE if cls == "door" else C.WINDOW_WIDTH_RANGE


def _attach_to_some_wall(lay: Layout, ids: list[str]) -> bool:
    changed = False
    for o in lay.openings():
        if o.id not in ids:
            continue
        for w in sorted(lay.walls, key=lambda w: w.id):
            lo, hi = _margins(w, o.width)
            if lo <= hi:
                o.host = w.id
                o.offset = round(min(max(o.offset, lo), hi), 2)
                changed = True
                break
    return changed


def _round_everything(lay: Layout, ids: list[str]) -> bool:
    changed = False
    idset = set(ids)
    def r2(x):
        return round(x, C.COORD_DECIMALS)
    for i, w in enumerate(lay.walls):
        if w.id not in idset:
            continue
        if isinstance(w, LineWall):
            lay.walls[i] = LineWall(w.id, Point2(r2(w.start.x), r2(w.start.y)),
                                    Point2(r2(w.end.x), r2(w.end.y)),
                                    r2(w.thickness), r2(w.height))
        else:
            lay.walls[i] = ArcWall(w.id, Point2(r2(w.center.x), r2(w.center.y)),
                                   r2(w.radius), round(w.start_angle, C.ANGLE_DECIMALS),
                                   round(w.sweep, C.ANGLE_DECIMALS), w.ccw,
                                   r2(w.thickness), r2(w.height))
        changed = True
    for o in lay.openings():
        if o.id in idset:
            o.offset, o.width, o.height = r2(o.offset), r2(o.width), r2(o.height)
            if o.sill is not None:
                o.sill = r2(o.sill)
            changed = True
    for room in lay.rooms:
        if room.id in idset:
            room.polygon = [Point2(r2(p.x), r2(p.y)) for p in room.polygon]
            changed = True
    return changed


def _resolve_overlaps(lay: Layout) -> bool:
    """Separate when combined widths fit with margins and spacing, else merge."""
    changed = False
    hosts = {w.id: w for w in lay.walls}
    by_host: dict[str, list[Opening]] = {}
    for o in lay.openings():
        if o.host in hosts:
            by_host.setdefault(o.host, []).append(o)
    for host_id, members in sorted(by_host.items()):
        host = hosts[host_id]
        length = wall_length(host)
        members.sort(key=lambda o: (o.offset, o.id))
        need = (sum(o.width for o in members)
                + C.OPENING_SPACING * (len(members) - 1) + 2 * C.OPENING_END_MARGIN)
        if need <= length + 1e-9:
            # separate: sweep left to right enforcing spacing, then pull back
            cursor = C.OPENING_END_MARGIN
            new_offsets = []
            for o in members:
                off = max(o.offset, cursor + o.width / 2.0)
                new_offsets.append(off)
                cursor = off + o.width / 2.0 + C.OPENING_SPACING
            overrun = (new_offsets[-1] + members[-1].width / 2.0
                       + C.OPENING_END_MARGIN) - length
            if overrun > 0:
                new_offsets = [off - overrun for off in new_offsets]
            for o, off in zip(members, new_offsets):
                if abs(off - o.offset) > 1e-9:
                    o.offset = round(off, 2)
                    changed = True
        else:
            # merge overlapping neighbours pairwise
            i = 0
            while i < len(members) - 1:
                a, b = members[i], members[i + 1]
                gap = (b.offset - b.width / 2.0) - (a.offset + a.width / 2.0)
                if gap < C.OPENING_SPACING - 1e-6 and a.cls == b.cls:
                    a.offset = round((a.offset + b.offset) / 2.0, 2)
                    a.width = round(min(max(_class_range(a.cls)),
                                        max(a.width, b.width)), 2)
                    _remove_opening(lay, b.id)
                    members.pop(i + 1)
                    changed = True
                else:
                    i += 1
    return changed


def _remove_opening(lay: Layout, oid: str):
    lay.doors = [o for o in lay.doors if o.id != oid]
    lay.windows = [o for o in lay.windows if o.id != oid]
