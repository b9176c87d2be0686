"""Layout data model and exact geometric primitives.

World frame: x east, y north, right-handed; units feet, angles radians.
Arcs are stored as (center, radius, start_angle, sweep, ccw) with sweep the
positive angular travel in (0, 2pi); three-point arc input is converted at
ingest and never stored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from . import constants as C

TWO_PI = C.TWO_PI


class GeometryError(ValueError):
    pass


class CollinearPoints(GeometryError):
    pass


class FullCircle(GeometryError):
    pass


class OffWall(GeometryError):
    pass


class TooFewVertices(GeometryError):
    pass


class ParseFailure(ValueError):
    """Document is not a structurally salvageable layout."""


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)


@dataclass
class LineWall:
    id: str
    start: Point2
    end: Point2
    thickness: float = C.DEFAULT_WALL_THICKNESS
    height: float = C.DEFAULT_WALL_HEIGHT

    @property
    def kind(self) -> str:
        return "line"


@dataclass
class ArcWall:
    id: str
    center: Point2
    radius: float
    start_angle: float
    sweep: float
    ccw: bool
    thickness: float = C.DEFAULT_WALL_THICKNESS
    height: float = C.DEFAULT_WALL_HEIGHT

    @property
    def kind(self) -> str:
        return "arc"

    @property
    def end_angle(self) -> float:
        return self.start_angle + (self.sweep if self.ccw else -self.sweep)

    def point_at_angle(self, ang: float) -> Point2:
        return Point2(self.center.x + self.radius * math.cos(ang),
                      self.center.y + self.radius * math.sin(ang))

    @property
    def start(self) -> Point2:
        return self.point_at_angle(self.start_angle)

    @property
    def end(self) -> Point2:
        return self.point_at_angle(self.end_angle)


Wall = LineWall | ArcWall


@dataclass
class Opening:
    id: str
    cls: str                 # "door" | "window"
    host: str
    offset: float            # arc-length from host start to opening center
    width: float
    height: float
    sill: float | None = None  # windows only


@dataclass
class Room:
    id: str
    polygon: list[Point2]
    wall_chain: list[str]


@dataclass
class Layout:
    walls: list[Wall] = field(default_factory=list)
    doors: list[Opening] = field(default_factory=list)
    windows: list[Opening] = field(default_factory=list)
    rooms: list[Room] = field(default_factory=list)
    units: str = "feet"
    # ingest annotations (wall_id, tag, detail); never serialized
    ingest_notes: list[tuple[str, str, float]] = field(default_factory=list)

    def wall_by_id(self, wall_id: str) -> Wall | None:
        for w in self.walls:
            if w.id == wall_id:
                return w
        return None

    def opening_by_id(self, oid: str) -> Opening | None:
        for o in self.doors + self.windows:
            if o.id == oid:
                return o
        return None

    def element_ids(self) -> list[str]:
        ids = [w.id for w in self.walls]
        ids += [o.id for o in self.doors]
        ids += [o.id for o in self.windows]
        ids += [r.id for r in self.rooms]
        return ids

    def openings(self) -> list[Opening]:
        return list(self.doors) + list(self.windows)


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------

def normalize_sweep(raw_sweep: float) -> float:
    """Fold a sweep into (0, 2pi); a sweep congruent to 0 is a full circle."""
    if not math.isfinite(raw_sweep):
        raise GeometryError(f"sweep not finite: {raw_sweep}")
    s = math.fmod(raw_sweep, TWO_PI)
    if s < 0:
        s += TWO_PI
    if s < 1e-12 or abs(s - TWO_PI) < 1e-12:
        raise FullCircle(f"sweep {raw_sweep} is a full circle")
    return s


@dataclass(frozen=True)
class ArcGeom:
    center: Point2
    radius: float
    start_angle: float
    sweep: float
    ccw: bool


def arc_from_3pt(p_start: Point2, p_mid: Point2, p_end: Point2) -> ArcGeom:
    """Circle through three points (sagitta midpoint form), oriented by point order."""
    ax, ay = p_start.x, p_start.y
    bx, by = p_mid.x, p_mid.y
    cx, cy = p_end.x, p_end.y
    # twice the signed triangle area
    d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if abs(d) <= C.COLLINEAR_AREA_EPS:
        raise CollinearPoints(f"points are collinear (2*area={d:.2e})")
    # circumcenter from perpendicular bisector equations
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / (2.0 * d)
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / (2.0 * d)
    center = Point2(ux, uy)
    radius = center.dist(p_start)
    ccw = d > 0
    a_start = math.atan2(ay - uy, ax - ux)
    a_end = math.atan2(cy - uy, cx - ux)
    raw = (a_end - a_start) if ccw else (a_start - a_end)
    sweep = normalize_sweep(raw)
    return ArcGeom(center, radius, a_start, sweep, ccw)


def wall_length(wall: Wall) -> float:
    if isinstance(wall, LineWall):
        return wall.start.dist(wall.end)
    return wall.radius * wall.sweep


def wall_point_at(wall: Wall, s: float) -> Point2:
    """Point at arc-length s from the wall start."""
    if isinstance(wall, LineWall):
        length = wall_length(wall)
        if length == 0:
            return wall.start
        t = s / length
        return Point2(wall.start.x + (wall.end.x - wall.start.x) * t,
                      wall.start.y + (wall.end.y - wall.start.y) * t)
    ang = wall.start_angle + (s / wall.radius) * (1.0 if wall.ccw else -1.0)
    return wall.point_at_angle(ang)


def wall_tangent_at(wall: Wall, s: float) -> tuple[float, float]:
    """Unit tangent (direction of travel start->end) at arc-length s."""
    if isinstance(wall, LineWall):
        length = wall_length(wall)
        if length == 0:
            return (1.0, 0.0)
        return ((wall.end.x - wall.start.x) / length,
                (wall.end.y - wall.start.y) / length)
    ang = wall.start_angle + (s / wall.radius) * (1.0 if wall.ccw else -1.0)
    if wall.ccw:
        return (-math.sin(ang), math.cos(ang))
    return (math.sin(ang), -math.cos(ang))


def wall_midpoint(wall: Wall) -> Point2:
    return wall_point_at(wall, wall_length(wall) / 2.0)


def wall_orientation(wall: LineWall) -> float:
    """Line direction folded into [0, pi)."""
    ang = math.atan2(wall.end.y - wall.start.y, wall.end.x - wall.start.x)
    return ang % math.pi


def opening_world_span(opening: Opening, host: Wall) -> tuple[Point2, Point2]:
    """World endpoints of the opening along its host (tangent chord on arcs)."""
    length = wall_length(host)
    half = opening.width / 2.0
    lo = opening.offset - half
    hi = opening.offset + half
    eps = 1e-9
    if lo < C.OPENING_END_MARGIN - eps or hi > length - C.OPENING_END_MARGIN + eps:
        raise OffWall(
            f"{opening.id}: span [{lo:.2f},{hi:.2f}] violates margins on "
            f"{host.id} (length {length:.2f})")
    if isinstance(host, LineWall):
        return (wall_point_at(host, lo), wall_point_at(host, hi))
    centre = wall_point_at(host, opening.offset)
    tx, ty = wall_tangent_at(host, opening.offset)
    return (Point2(centre.x - half * tx, centre.y - half * ty),
            Point2(centre.x + half * tx, centre.y + half * ty))


def opening_world_center(opening: Opening, host: Wall) -> Point2:
    return wall_point_at(host, opening.offset)


def signed_area(polygon: list[Point2]) -> float:
    """Shoelace area; counterclockwise positive."""
    if len(polygon) < 3:
        raise TooFewVertices(f"polygon has {len(polygon)} vertices")
    total = 0.0
    n = len(polygon)
    for i in range(n):
        p = polygon[i]
        q = polygon[(i + 1) % n]
        total += p.x * q.y - q.x * p.y
    return total / 2.0


def polygon_centroid(polygon: list[Point2]) -> Point2:
    a = signed_area(polygon)
    if abs(a) < 1e-12:
        xs = sum(p.x for p in polygon) / len(polygon)
        ys = sum(p.y for p in polygon) / len(polygon)
        return Point2(xs, ys)
    cx = cy = 0.0
    n = len(polygon)
    for i in range(n):
        p = polygon[i]
        q = polygon[(i + 1) % n]
        cross = p.x * q.y - q.x * p.y
        cx += (p.x + q.x) * cross
        cy += (p.y + q.y) * cross
    return Point2(cx / (6.0 * a), cy / (6.0 * a))


def sample_arc(wall: ArcWall, max_sagitta: float = C.ARC_SAMPLE_SAGITTA,
               include_end: bool = True) -> list[Point2]:
    """Chordal polyline along the arc, sagitta-bounded, endpoints exact."""
    if wall.radius <= max_sagitta:
        n = 8
    else:
        dtheta = 2.0 * math.acos(max(1.0 - max_sagitta / wall.radius, -1.0))
        n = max(8, int(math.ceil(wall.sweep / max(dtheta, 1e-6))))
    step = wall.sweep / n * (1.0 if wall.ccw else -1.0)
    pts = [wall.point_at_angle(wall.start_angle + step * i) for i in range(n + 1)]
    if not include_end:
        pts = pts[:-1]
    return pts


def assign_canonical_ids(layout: Layout) -> Layout:
    """Deterministic relabeling: boundary walls first (CCW from the wall with
    the lexicographically smallest midpoint), interior walls left-to-right then
    bottom-to-top, openings grouped under hosts, rooms in the same order.
    Geometry is untouched; applying twice is a fixed point.
    """
    from . import planar  # local import: planar depends on geometry

    walls = list(layout.walls)
    ring_ids: list[str] = []
    if walls:
        try:
            ring_ids = planar.outer_boundary_wall_ids(walls)
        except planar.NoBoundedFace:
            ring_ids = []
    ring_set = set(ring_ids)

    def mid_key(w: Wall) -> tuple[float, float]:
        m = wall_midpoint(w)
        return (round(m.x, 6), round(m.y, 6))

    if ring_ids:
        start = min(range(len(ring_ids)),
                    key=lambda i: mid_key(layout.wall_by_id(ring_ids[i])))
        ordered = [ring_ids[(start + i) % len(ring_ids)] for i in range(len(ring_ids))]
    else:
        ordered = []
    interior = sorted((w for w in walls if w.id not in ring_set), key=mid_key)
    wall_order = ordered + [w.id for w in interior]
    # walls not reachable from the arrangement (shouldn't happen) keep sorted order
    seen = set(wall_order)
    wall_order += sorted((w.id for w in walls if w.id not in seen))

    wall_map = {old: f"wall{i + 1}" for i, old in enumerate(wall_order)}
    host_rank = {old: i for i, old in enumerate(wall_order)}

    def opening_key(o: Opening) -> tuple[int, float]:
        return (host_rank.get(o.host, len(wall_order)), o.offset)

    doors = sorted(layout.doors, key=opening_key)
    windows = sorted(layout.windows, key=opening_key)
    door_map = {o.id: f"door{i + 1}" for i, o in enumerate(doors)}
    win_map = {o.id: f"win{i + 1}" for i, o in enumerate(windows)}

    def room_key(r: Room) -> tuple[float, float]:
        c = polygon_centroid(r.polygon)
        return (round(c.x, 6), round(c.y, 6))

    rooms = sorted(layout.rooms, key=room_key)
    room_map = {r.id: f"room{i + 1}" for i, r in enumerate(rooms)}

    new_walls = []
    by_rank = sorted(walls, key=lambda w: host_rank[w.id])
    for w in by_rank:
        new_walls.append(replace(w, id=wall_map[w.id]))
    new_doors = [replace(o, id=door_map[o.id], host=wall_map.get(o.host, o.host))
                 for o in doors]
    new_windows = [replace(o, id=win_map[o.id], host=wall_map.get(o.host, o.host))
                   for o in windows]
    new_rooms = [Room(id=room_map[r.id], polygon=list(r.polygon),
                      wall_chain=[wall_map.get(wid, wid) for wid in r.wall_chain])
                 for r in rooms]
    return Layout(walls=new_walls, doors=new_doors, windows=new_windows,
                  rooms=new_rooms, units=layout.units,
                  ingest_notes=[(wall_map.get(i, i), t, d)
                                for (i, t, d) in layout.ingest_notes])


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------

def _num(x: float, decimals: int = C.COORD_DECIMALS) -> float:
    v = round(float(x), decimals)
    return 0.0 if v == 0.0 else v  # normalize -0.0


def _pt(p: Point2) -> list[float]:
    return [_num(p.x), _num(p.y)]


def layout_to_doc(layout: Layout) -> dict:
    walls = []
    for w in layout.walls:
        if isinstance(w, LineWall):
            walls.append({"id": w.id, "kind": "line",
                          "start": _pt(w.start), "end": _pt(w.end),
                          "thickness": _num(w.thickness), "height": _num(w.height)})
        else:
            walls.append({"id": w.id, "kind": "arc", "center": _pt(w.center),
                          "radius": _num(w.radius),
                          "start_angle": _num(w.start_angle, C.ANGLE_DECIMALS),
                          "sweep": _num(w.sweep, C.ANGLE_DECIMALS),
                          "ccw": bool(w.ccw),
                          "thickness": _num(w.thickness), "height": _num(w.height)})
    doors = [{"id": o.id, "host": o.host, "offset": _num(o.offset),
              "width": _num(o.width), "height": _num(o.height)}
             for o in layout.doors]
    windows = [{"id": o.id, "host": o.host, "offset": _num(o.offset),
                "width": _num(o.width), "height": _num(o.height),
                "sill": _num(o.sill if o.sill is not None else C.DEFAULT_WINDOW_SILL)}
               for o in layout.windows]
    rooms = [{"id": r.id, "polygon": [_pt(p) for p in r.polygon],
              "wall_chain": list(r.wall_chain)} for r in layout.rooms]
    return {"units": "feet", "walls": walls, "doors": doors,
            "windows": windows, "rooms": rooms}


def dumps_layout(layout: Layout) -> str:
    return json.dumps(layout_to_doc(layout), separators=(",", ":")) + "\n"


def _require(cond: bool, msg: str):
    if not cond:
        raise ParseFailure(msg)


def _parse_point(v) -> Point2:
    _require(isinstance(v, (list, tuple)) and len(v) == 2, f"bad point: {v!r}")
    _require(all(isinstance(c, (int, float)) for c in v), f"bad point: {v!r}")
    return Point2(float(v[0]), float(v[1]))


def layout_from_doc(doc: dict) -> Layout:
    """Parse a layout document. Structural problems raise ParseFailure;
    content problems (bad values, missing hosts, ...) are left for validate().
    Walls of kind "arc3pt" are converted at ingest; near-collinear ones fall
    back to lines and are annotated for the validator.
    """
    _require(isinstance(doc, dict), "document is not an object")
    layout = Layout(units=str(doc.get("units", "feet")))
    walls = doc.get("walls", [])
    _require(isinstance(walls, list), "walls is not a list")
    for w in walls:
        _require(isinstance(w, dict), "wall entry is not an object")
        kind = w.get("kind")
        wid = str(w.get("id", ""))
        thickness = float(w.get("thickness", C.DEFAULT_WALL_THICKNESS))
        height = float(w.get("height", C.DEFAULT_WALL_HEIGHT))
        if kind == "line":
            layout.walls.append(LineWall(wid, _parse_point(w["start"]),
                                         _parse_point(w["end"]), thickness, height))
        elif kind == "arc":
            layout.walls.append(ArcWall(wid, _parse_point(w["center"]),
                                        float(w["radius"]), float(w["start_angle"]),
                                        float(w["sweep"]), bool(w.get("ccw", True)),
                                        thickness, height))
        elif kind == "arc3pt":
            p1 = _parse_point(w["p_start"])
            p2 = _parse_point(w["p_mid"])
            p3 = _parse_point(w["p_end"])
            try:
                geom = arc_from_3pt(p1, p2, p3)
            except CollinearPoints:
                layout.walls.append(LineWall(wid, p1, p3, thickness, height))
                layout.ingest_notes.append((wid, "arc3pt_collinear", 0.0))
                continue
            sagitta = _arc3pt_sagitta(p1, p2, p3)
            if sagitta <= C.ARC_MIN_SAGITTA:
                layout.walls.append(LineWall(wid, p1, p3, thickness, height))
                layout.ingest_notes.append((wid, "arc3pt_near_collinear", sagitta))
            else:
                layout.walls.append(ArcWall(wid, geom.center, geom.radius,
                                            geom.start_angle, geom.sweep, geom.ccw,
                                            thickness, height))
        else:
            raise ParseFailure(f"unknown wall kind: {kind!r}")
    for key, cls in (("doors", "door"), ("windows", "window")):
        entries = doc.get(key, [])
        _require(isinstance(entries, list), f"{key} is not a list")
        for o in entries:
            _require(isinstance(o, dict), f"{key} entry is not an object")
            opening = Opening(str(o.get("id", "")), cls, str(o.get("host", "")),
                              float(o["offset"]), float(o["width"]),
                              float(o.get("height",
                                          C.DEFAULT_DOOR_HEIGHT if cls == "door"
                                          else C.DEFAULT_WINDOW_HEIGHT)),
                              float(o["sill"]) if cls == "window" and "sill" in o
                              else (C.DEFAULT_WINDOW_SILL if cls == "window" else None))
            (layout.doors if cls == "door" else layout.windows).append(opening)
    rooms = doc.get("rooms", [])
    _require(isinstance(rooms, list), "rooms is not a list")
    for r in rooms:
        _require(isinstance(r, dict), "room entry is not an object")
        poly = r.get("polygon", [])
        _require(isinstance(poly, list), "room polygon is not a list")
        layout.rooms.append(Room(str(r.get("id", "")),
                                 [_parse_point(p) for p in poly],
                                 [str(x) for x in r.get("wall_chain", [])]))
    return layout


def _arc3pt_sagitta(p1: Point2, p2: Point2, p3: Point2) -> float:
    """Perpendicular distance from the mid sample to the chord."""
    chord = p1.dist(p3)
    if chord == 0:
        return 0.0
    return abs((p3.x - p1.x) * (p1.y - p2.y) - (p1.x - p2.x) * (p3.y - p1.y)) / chord


def loads_layout(text: str) -> Layout:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseFailure(f"invalid JSON: {e}") from e
    return layout_from_doc(doc)


def layout_digest(layout: Layout) -> str:
    import hashlib
    return hashlib.sha256(dumps_layout(layout).encode()).hexdigest()
