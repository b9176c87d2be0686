"""Planar arrangement of walls: noding, half-edge face enumeration, outlines.

Walls (line or arc) are split at mutual intersections and T-junctions, welded
at shared nodes, and traversed as a doubly connected edge list. Bounded faces
are CCW cycles; the single unbounded face is the footprint outline reversed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import constants as C
from .geometry import ArcWall, LineWall, Point2, Wall, sample_arc, signed_area

NODE_TOL = C.CONNECT_TOL


class NoBoundedFace(ValueError):
    pass


@dataclass
class Piece:
    """A wall fragment between two junction nodes."""
    source_id: str
    kind: str                    # "line" | "arc"
    a: Point2
    b: Point2
    # arc-only geometry
    center: Point2 | None = None
    radius: float = 0.0
    ang_a: float = 0.0           # angle of endpoint a on the circle
    ang_b: float = 0.0
    ccw: bool = True

    def length(self) -> float:
        if self.kind == "line":
            return self.a.dist(self.b)
        return self.radius * _sweep_between(self.ang_a, self.ang_b, self.ccw)

    def polyline(self, max_sagitta: float = C.ARC_SAMPLE_SAGITTA) -> list[Point2]:
        """Sampled points a..b inclusive."""
        if self.kind == "line":
            return [self.a, self.b]
        sweep = _sweep_between(self.ang_a, self.ang_b, self.ccw)
        if self.radius <= max_sagitta:
            n = 8
        else:
            dtheta = 2.0 * math.acos(max(1.0 - max_sagitta / self.radius, -1.0))
            n = max(4, int(math.ceil(sweep / max(dtheta, 1e-6))))
        step = sweep / n * (1.0 if self.ccw else -1.0)
        pts = [Point2(self.center.x + self.radius * math.cos(self.ang_a + step * i),
                      self.center.y + self.radius * math.sin(self.ang_a + step * i))
               for i in range(n + 1)]
        pts[0], pts[-1] = self.a, self.b
        return pts

    def tangent_from(self, origin_is_a: bool) -> float:
        """Departure tangent angle leaving the given endpoint."""
        if self.kind == "line":
            p, q = (self.a, self.b) if origin_is_a else (self.b, self.a)
            return math.atan2(q.y - p.y, q.x - p.x)
        ang = self.ang_a if origin_is_a else self.ang_b
        fwd = self.ccw if origin_is_a else not self.ccw
        if fwd:
            return math.atan2(math.cos(ang), -math.sin(ang))
        return math.atan2(-math.cos(ang), math.sin(ang))

    def curvature_from(self, origin_is_a: bool) -> float:
        """Signed curvature leaving the endpoint (left-turning positive)."""
        if self.kind == "line":
            return 0.0
        fwd = self.ccw if origin_is_a else not self.ccw
        return (1.0 if fwd else -1.0) / self.radius

    def reversed(self) -> "Piece":
        return Piece(self.source_id, self.kind, self.b, self.a, self.center,
                     self.radius, self.ang_b, self.ang_a, not self.ccw)


def _sweep_between(ang_a: float, ang_b: float, ccw: bool) -> float:
    raw = (ang_b - ang_a) if ccw else (ang_a - ang_b)
    s = math.fmod(raw, 2.0 * math.pi)
    if s < 0:
        s += 2.0 * math.pi
    if s == 0.0:
        s = 2.0 * math.pi  # guarded by callers; full pieces never constructed
    return s


# ---------------------------------------------------------------------------
# Intersections
# ---------------------------------------------------------------------------

def _line_params(w: LineWall, pts: list[Point2]) -> list[float]:
    """Arc-length parameters of points projected on the segment."""
    length = w.start.dist(w.end)
    if length == 0:
        return []
    ux = (w.end.x - w.start.x) / length
    uy = (w.end.y - w.start.y) / length
    return [(p.x - w.start.x) * ux + (p.y - w.start.y) * uy for p in pts]


def _seg_seg(p1, p2, p3, p4, tol: float = NODE_TOL) -> list[Point2]:
    d1 = (p2.x - p1.x, p2.y - p1.y)
    d2 = (p4.x - p3.x, p4.y - p3.y)
    len1 = math.hypot(*d1)
    len2 = math.hypot(*d2)
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    out = []
    if abs(denom) > 1e-12 and len1 > 0 and len2 > 0:
        t = ((p3.x - p1.x) * d2[1] - (p3.y - p1.y) * d2[0]) / denom
        u = ((p3.x - p1.x) * d1[1] - (p3.y - p1.y) * d1[0]) / denom
        # slack in distance units: near-miss T-junctions within the noding
        # tolerance still count as meetings
        eps_t = tol / len1
        eps_u = tol / len2
        if -eps_t <= t <= 1 + eps_t and -eps_u <= u <= 1 + eps_u:
            out.append(Point2(p1.x + t * d1[0], p1.y + t * d1[1]))
    else:
        # collinear overlap: contribute each other's endpoints that lie inside
        for p, (a, b) in ((p3, (p1, p2)), (p4, (p1, p2)),
                          (p1, (p3, p4)), (p2, (p3, p4))):
            if _point_on_segment(p, a, b):
                out.append(p)
    return out


def _point_on_segment(p: Point2, a: Point2, b: Point2, tol: float = 1e-9) -> bool:
    cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
    length = a.dist(b)
    if length == 0:
        return p.dist(a) <= tol
    if abs(cross) / length > tol:
        return False
    dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)
    return -tol <= dot <= length * length + tol


def _circle_line(center: Point2, r: float, a: Point2, b: Point2) -> list[Point2]:
    dx, dy = b.x - a.x, b.y - a.y
    fx, fy = a.x - center.x, a.y - center.y
    A = dx * dx + dy * dy
    B = 2 * (fx * dx + fy * dy)
    Cc = fx * fx + fy * fy - r * r
    disc = B * B - 4 * A * Cc
    if disc < 0 or A == 0:
        return []
    sq = math.sqrt(disc)
    out = []
    for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
        if -1e-9 <= t <= 1 + 1e-9:
            out.append(Point2(a.x + t * dx, a.y + t * dy))
    return out


def _circle_circle(c1: Point2, r1: float, c2: Point2, r2: float) -> list[Point2]:
    d = c1.dist(c2)
    if d == 0 or d > r1 + r2 + 1e-9 or d < abs(r1 - r2) - 1e-9:
        return []
    a = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
    h2 = r1 * r1 - a * a
    h = math.sqrt(max(h2, 0.0))
    mx = c1.x + a * (c2.x - c1.x) / d
    my = c1.y + a * (c2.y - c1.y) / d
    if h < 1e-12:
        return [Point2(mx, my)]
    ox = h * (c2.y - c1.y) / d
    oy = h * (c2.x - c1.x) / d
    return [Point2(mx + ox, my - oy), Point2(mx - ox, my + oy)]


def _angle_on_arc(w: ArcWall, p: Point2) -> float | None:
    """Angle of p on the arc's circle if p lies on the swept portion."""
    ang = math.atan2(p.y - w.center.y, p.x - w.center.x)
    rel = (ang - w.start_angle) * (1.0 if w.ccw else -1.0)
    rel = math.fmod(rel, 2.0 * math.pi)
    if rel < 0:
        rel += 2.0 * math.pi
    slack = 1e-6 / max(w.radius, 1e-6)
    if rel <= w.sweep + slack:
        return min(max(rel, 0.0), w.sweep)
    # snap hits that are numerically at the endpoints
    if rel >= 2.0 * math.pi - slack:
        return 0.0
    return None


def _wall_intersections(w1: Wall, w2: Wall) -> list[Point2]:
    if isinstance(w1, LineWall) and isinstance(w2, LineWall):
        return _seg_seg(w1.start, w1.end, w2.start, w2.end)
    if isinstance(w1, LineWall) and isinstance(w2, ArcWall):
        pts = _circle_line(w2.center, w2.radius, w1.start, w1.end)
        return [p for p in pts if _angle_on_arc(w2, p) is not None]
    if isinstance(w1, ArcWall) and isinstance(w2, LineWall):
        return _wall_intersections(w2, w1)
    pts = _circle_circle(w1.center, w1.radius, w2.center, w2.radius)
    return [p for p in pts
            if _angle_on_arc(w1, p) is not None and _angle_on_arc(w2, p) is not None]


# ---------------------------------------------------------------------------
# Noding
# ---------------------------------------------------------------------------

class _NodePool:
    """Welds nearby points into canonical nodes (first-come coordinates)."""

    def __init__(self, tol: float):
        self.tol = tol
        self.nodes: list[Point2] = []
        self._grid: dict[tuple[int, int], list[int]] = {}

    def _cells(self, p: Point2):
        cx = int(math.floor(p.x / self.tol))
        cy = int(math.floor(p.y / self.tol))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                yield (cx + dx, cy + dy)

    def get(self, p: Point2) -> Point2:
        best = None
        best_d = self.tol
        for cell in self._cells(p):
            for idx in self._grid.get(cell, ()):
                d = self.nodes[idx].dist(p)
                if d <= best_d:
                    best, best_d = idx, d
        if best is not None:
            return self.nodes[best]
        self.nodes.append(p)
        idx = len(self.nodes) - 1
        cell = (int(math.floor(p.x / self.tol)), int(math.floor(p.y / self.tol)))
        self._grid.setdefault(cell, []).append(idx)
        return p


def node_walls(walls: list[Wall], tol: float = NODE_TOL) -> list[Piece]:
    """Split every wall at intersections with every other; weld endpoints."""
    walls = [w for w in walls if _usable(w)]
    cuts: dict[int, list[float]] = {i: [] for i in range(len(walls))}
    for i in range(len(walls)):
        for j in range(i + 1, len(walls)):
            for p in _wall_intersections(walls[i], walls[j]):
                for k, w in ((i, walls[i]), (j, walls[j])):
                    s = _param_of(w, p)
                    if s is not None:
                        cuts[k].append(s)
    pool = _NodePool(tol)
    pieces: list[Piece] = []
    for i, w in enumerate(walls):
        length = _length_of(w)
        params = sorted({0.0, length, *[min(max(s, 0.0), length) for s in cuts[i]]})
        # drop params closer than tol along the wall
        kept = [params[0]]
        for s in params[1:]:
            if s - kept[-1] > tol:
                kept.append(s)
            elif s == length:
                kept[-1] = length
        if kept[-1] != length:
            kept.append(length)
        for s0, s1 in zip(kept, kept[1:]):
            piece = _make_piece(w, s0, s1, pool)
            if piece is not None and piece.a.dist(piece.b) > 1e-9 or (
                    piece is not None and piece.kind == "arc"):
                pieces.append(piece)
    return pieces


def _usable(w: Wall) -> bool:
    if isinstance(w, LineWall):
        return w.start.dist(w.end) > 1e-9
    return w.radius > 1e-9 and w.sweep > 1e-9


def _length_of(w: Wall) -> float:
    if isinstance(w, LineWall):
        return w.start.dist(w.end)
    return w.radius * w.sweep


def _param_of(w: Wall, p: Point2) -> float | None:
    if isinstance(w, LineWall):
        length = w.start.dist(w.end)
        if length == 0:
            return None
        ux = (w.end.x - w.start.x) / length
        uy = (w.end.y - w.start.y) / length
        s = (p.x - w.start.x) * ux + (p.y - w.start.y) * uy
        if -1e-6 <= s <= length + 1e-6:
            return min(max(s, 0.0), length)
        return None
    rel = _angle_on_arc(w, p)
    if rel is None:
        return None
    return rel * w.radius


def _make_piece(w: Wall, s0: float, s1: float, pool: _NodePool) -> Piece | None:
    if s1 - s0 <= 1e-9:
        return None
    if isinstance(w, LineWall):
        length = w.start.dist(w.end)
        def at(s):
            t = s / length
            return Point2(w.start.x + (w.end.x - w.start.x) * t,
                          w.start.y + (w.end.y - w.start.y) * t)
        a = pool.get(at(s0))
        b = pool.get(at(s1))
        if a is b or a.dist(b) <= 1e-9:
            return None
        return Piece(w.id, "line", a, b)
    sgn = 1.0 if w.ccw else -1.0
    ang_a = w.start_angle + sgn * s0 / w.radius
    ang_b = w.start_angle + sgn * s1 / w.radius
    a = pool.get(w.point_at_angle(ang_a))
    b = pool.get(w.point_at_angle(ang_b))
    return Piece(w.id, "arc", a, b, w.center, w.radius, ang_a, ang_b, w.ccw)


# ---------------------------------------------------------------------------
# Half-edge face enumeration
# ---------------------------------------------------------------------------

@dataclass
class HalfEdge:
    piece: Piece
    forward: bool  # True: origin at piece.a

    @property
    def origin(self) -> Point2:
        return self.piece.a if self.forward else self.piece.b

    @property
    def target(self) -> Point2:
        return self.piece.b if self.forward else self.piece.a

    def departure(self) -> tuple[float, float]:
        return (self.piece.tangent_from(self.forward),
                self.piece.curvature_from(self.forward))

    def directed_piece(self) -> Piece:
        return self.piece if self.forward else self.piece.reversed()


@dataclass
class Face:
    edges: list[HalfEdge]
    polygon: list[Point2]
    area: float

    def wall_chain(self) -> list[str]:
        chain = []
        for e in self.edges:
            if not chain or chain[-1] != e.piece.source_id:
                chain.append(e.piece.source_id)
        if len(chain) > 1 and chain[0] == chain[-1]:
            chain.pop()
        return chain


def build_faces(pieces: list[Piece]) -> list[Face]:
    """All face cycles of the arrangement (bounded CCW positive, outer negative)."""
    half_edges: list[HalfEdge] = []
    for p in pieces:
        half_edges.append(HalfEdge(p, True))
        half_edges.append(HalfEdge(p, False))
    # outgoing edges per node, sorted counterclockwise by departure tangent
    outgoing: dict[tuple[float, float], list[HalfEdge]] = {}
    for he in half_edges:
        outgoing.setdefault(he.origin.as_tuple(), []).append(he)
    for key in outgoing:
        outgoing[key].sort(key=lambda h: h.departure())

    def twin(he: HalfEdge) -> HalfEdge:
        for cand in outgoing[he.target.as_tuple()]:
            if cand.piece is he.piece and cand.forward != he.forward:
                return cand
        raise RuntimeError("twin not found")

    def next_edge(he: HalfEdge) -> HalfEdge:
        """Clockwise-next around the target from the reversed direction:
        yields faces with interior on the left."""
        t = twin(he)
        ring = outgoing[he.target.as_tuple()]
        idx = ring.index(t)
        return ring[(idx - 1) % len(ring)]

    visited: set[tuple[int, bool]] = set()
    faces: list[Face] = []
    order = sorted(range(len(half_edges)),
                   key=lambda i: (half_edges[i].origin.as_tuple(),
                                  half_edges[i].departure()))
    for idx in order:
        he = half_edges[idx]
        key = (id(he.piece), he.forward)
        if key in visited:
            continue
        cycle = []
        cur = he
        for _ in range(len(half_edges) + 1):
            k = (id(cur.piece), cur.forward)
            if k in visited:
                break
            visited.add(k)
            cycle.append(cur)
            cur = next_edge(cur)
            if cur is he:
                break
        if not cycle:
            continue
        poly: list[Point2] = []
        for e in cycle:
            pts = e.directed_piece().polyline()
            poly.extend(pts[:-1])
        if len(poly) >= 3:
            area = signed_area(poly)
        else:
            area = 0.0
        faces.append(Face(cycle, poly, area))
    return faces


def bounded_faces(pieces: list[Piece], min_area: float = 1e-6) -> list[Face]:
    faces = [f for f in build_faces(pieces) if f.area > min_area]
    if not faces:
        raise NoBoundedFace("walls do not enclose any region")
    faces.sort(key=lambda f: (round(f.polygon[0].x, 6), round(f.polygon[0].y, 6)))
    return faces


def outer_face(pieces: list[Piece]) -> Face:
    faces = build_faces(pieces)
    candidates = [f for f in faces if f.area < -1e-9]
    if not candidates:
        raise NoBoundedFace("no outer face: graph encloses nothing")
    return min(candidates, key=lambda f: f.area)


def outer_boundary_polygon(walls: list[Wall]) -> list[Point2]:
    """Footprint outline, CCW."""
    pieces = node_walls(walls)
    outer = outer_face(pieces)
    poly = list(reversed(outer.polygon))
    return poly


def outer_boundary_wall_ids(walls: list[Wall]) -> list[str]:
    """Source wall ids around the footprint, in CCW order, deduplicated."""
    pieces = node_walls(walls)
    outer = outer_face(pieces)
    ids: list[str] = []
    for e in reversed(outer.edges):
        sid = e.piece.source_id
        if not ids or ids[-1] != sid:
            ids.append(sid)
    if len(ids) > 1 and ids[0] == ids[-1]:
        ids.pop()
    # interior spurs can appear on the outer cycle (slits); keep first occurrence
    seen = set()
    unique = []
    for sid in ids:
        if sid not in seen:
            seen.add(sid)
            unique.append(sid)
    return unique


def min_caliper_width(polygon: list[Point2]) -> float:
    """Minimum width of the convex hull (rotating-calipers definition)."""
    hull = _convex_hull(polygon)
    if len(hull) < 3:
        return 0.0
    best = math.inf
    n = len(hull)
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        length = a.dist(b)
        if length < 1e-12:
            continue
        width = max(abs((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x))
                    / length for p in hull)
        best = min(best, width)
    return 0.0 if best is math.inf else best


def _convex_hull(points: list[Point2]) -> list[Point2]:
    pts = sorted(set((p.x, p.y) for p in points))
    if len(pts) <= 2:
        return [Point2(*p) for p in pts]
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return [Point2(*p) for p in lower[:-1] + upper[:-1]]


def point_in_polygon(p: Point2, polygon: list[Point2], eps: float = 1e-9) -> bool:
    """Inside-or-on test (ray casting with boundary tolerance)."""
    n = len(polygon)
    for i in range(n):
        if _point_on_segment(p, polygon[i], polygon[(i + 1) % n], tol=max(eps, 1e-9)):
            return True
    inside = False
    j = n - 1
    for i in range(n):
        pi, pj = polygon[i], polygon[j]
        if (pi.y > p.y) != (pj.y > p.y):
            xcross = (pj.x - pi.x) * (p.y - pi.y) / (pj.y - pi.y) + pi.x
            if p.x < xcross:
                inside = not inside
        j = i
    return inside
