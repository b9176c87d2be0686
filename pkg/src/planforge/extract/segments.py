"""World-space segment conditioning: cluster snapping, merging, corner
welding, junction noding, and stub retention.

Merging has two modes, applied to a fixed point in canonical order so the
result is independent of input order: end-to-end fusion of collinear
fragments, and centerline replacement of parallel double strokes (the gap
becomes the wall thickness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .. import constants as C
from ..geometry import ArcWall, LineWall, Point2, Wall, wall_length
from .. import planar
from .orient import OrientationModel


@dataclass
class WorldSegment:
    a: Point2
    b: Point2
    support: int = 1
    thickness: float = C.DEFAULT_WALL_THICKNESS

    def length(self) -> float:
        return self.a.dist(self.b)

    def angle(self) -> float:
        return math.atan2(self.b.y - self.a.y, self.b.x - self.a.x) % math.pi


def _fold(diff: float) -> float:
    """Angular difference folded into [0, pi/2]."""
    d = abs(diff) % math.pi
    return min(d, math.pi - d)


def snap_to_clusters(segments: list[WorldSegment],
                     model: OrientationModel) -> list[WorldSegment]:
    """Rotate each segment about its midpoint onto its cluster mean when the
    deviation is within the new-cluster threshold."""
    out = []
    threshold = math.radians(C.NEW_CLUSTER_DEVIATION_DEG)
    for seg in segments:
        ang = seg.angle()
        _, dev = model.nearest_mean(ang)
        if dev > 1e-12 and dev <= threshold:
            idx, _ = model.nearest_mean(ang)
            target = model.means[idx]
            # shortest rotation mod pi
            delta = (target - ang + math.pi / 2) % math.pi - math.pi / 2
            mid = Point2((seg.a.x + seg.b.x) / 2, (seg.a.y + seg.b.y) / 2)
            cos_d, sin_d = math.cos(delta), math.sin(delta)
            def rot(p: Point2) -> Point2:
                dx, dy = p.x - mid.x, p.y - mid.y
                return Point2(mid.x + dx * cos_d - dy * sin_d,
                              mid.y + dx * sin_d + dy * cos_d)
            out.append(WorldSegment(rot(seg.a), rot(seg.b), seg.support,
                                    seg.thickness))
        else:
            out.append(seg)
    return out


def _canonical_order(segments: list[WorldSegment]) -> list[WorldSegment]:
    return sorted(segments, key=lambda s: (round(s.angle(), 4),
                                           round(min(s.a.x, s.b.x), 3),
                                           round(min(s.a.y, s.b.y), 3),
                                           -s.length()))


def _axis_stats(s1: WorldSegment, s2: WorldSegment):
    """Shared-axis projection bookkeeping for a candidate pair."""
    w1, w2 = s1.length(), s2.length()
    ang1, ang2 = s1.angle(), s2.angle()
    delta = (ang2 - ang1 + math.pi / 2) % math.pi - math.pi / 2
    ang = (ang1 + delta * w2 / (w1 + w2)) % math.pi
    ux, uy = math.cos(ang), math.sin(ang)
    cx = (s1.a.x * w1 / 2 + s1.b.x * w1 / 2 + s2.a.x * w2 / 2 + s2.b.x * w2 / 2) / (w1 + w2)
    cy = (s1.a.y * w1 / 2 + s1.b.y * w1 / 2 + s2.a.y * w2 / 2 + s2.b.y * w2 / 2) / (w1 + w2)
    def proj(p: Point2) -> float:
        return (p.x - cx) * ux + (p.y - cy) * uy
    def off(p: Point2) -> float:
        return -(p.x - cx) * uy + (p.y - cy) * ux
    i1 = sorted([proj(s1.a), proj(s1.b)])
    i2 = sorted([proj(s2.a), proj(s2.b)])
    o1 = (off(s1.a) + off(s1.b)) / 2.0
    o2 = (off(s2.a) + off(s2.b)) / 2.0
    return (ang, ux, uy, cx, cy, i1, i2, o1, o2)


def _try_merge(s1: WorldSegment, s2: WorldSegment) -> WorldSegment | None:
    # short fragments carry angle noise ~atan(band/length); the gate widens
    # accordingly but never lets distinctly-angled walls (3 deg apart) merge
    shorter_len = min(s1.length(), s2.length())
    gate = max(math.radians(C.MERGE_ANGLE_MAX_DEG),
               min(math.atan2(0.35, max(shorter_len, 1e-6)), math.radians(2.8)))
    if _fold(s1.angle() - s2.angle()) > gate:
        return None
    ang, ux, uy, cx, cy, i1, i2, o1, o2 = _axis_stats(s1, s2)
    gap_perp = abs(o1 - o2)
    overlap = min(i1[1], i2[1]) - max(i1[0], i2[0])
    shorter = min(i1[1] - i1[0], i2[1] - i2[0])

    if gap_perp <= C.MERGE_PERP_OFFSET:
        # end-to-end / overlapping fusion of collinear fragments
        gap_long = max(i1[0], i2[0]) - min(i1[1], i2[1])
        if gap_long > C.MERGE_ENDPOINT_GAP:
            return None
        lo = min(i1[0], i2[0])
        hi = max(i1[1], i2[1])
        mid_off = (o1 * s1.length() + o2 * s2.length()) / (s1.length() + s2.length())
        nx, ny = -uy, ux
        a = Point2(cx + lo * ux + mid_off * nx, cy + lo * uy + mid_off * ny)
        b = Point2(cx + hi * ux + mid_off * nx, cy + hi * uy + mid_off * ny)
        return WorldSegment(a, b, s1.support + s2.support,
                            max(s1.thickness, s2.thickness))

    if (C.MERGE_PERP_OFFSET < gap_perp <= C.DOUBLE_STROKE_GAP_MAX
            and shorter > 0 and overlap >= C.DOUBLE_STROKE_OVERLAP * shorter):
        # parallel double strokes become one centerline; gap sets thickness
        lo = min(i1[0], i2[0])
        hi = max(i1[1], i2[1])
        mid_off = (o1 + o2) / 2.0
        nx, ny = -uy, ux
        a = Point2(cx + lo * ux + mid_off * nx, cy + lo * uy + mid_off * ny)
        b = Point2(cx + hi * ux + mid_off * nx, cy + hi * uy + mid_off * ny)
        return WorldSegment(a, b, s1.support + s2.support, round(gap_perp, 2))
    return None


def merge_segments(segments: list[WorldSegment],
                   model: OrientationModel | None = None) -> list[WorldSegment]:
    """Pairwise merging to a fixed point, orientation-snapped first."""
    if model is not None:
        segments = snap_to_clusters(segments, model)
    work = _canonical_order(segments)
    changed = True
    guard = 0
    while changed and guard < 10 * max(len(work), 1):
        changed = False
        guard += 1
        n = len(work)
        done = False
        for i in range(n):
            for j in range(i + 1, n):
                merged = _try_merge(work[i], work[j])
                if merged is not None:
                    rest = [work[k] for k in range(n) if k not in (i, j)]
                    work = _canonical_order(rest + [merged])
                    changed = True
                    done = True
                    break
            if done:
                break
    return work


# ---------------------------------------------------------------------------
# Corner welding and noding
# ---------------------------------------------------------------------------

def weld_corners(segments: list[WorldSegment]) -> list[WorldSegment]:
    """Close small gaps: extend near-miss corners to the line intersection,
    project T-junction endpoints onto nearby interiors."""
    segs = [replace(s) for s in segments]

    def endpoints(s):
        return [("a", s.a), ("b", s.b)]

    for i, s1 in enumerate(segs):
        for which1, p1 in endpoints(s1):
            # corner snap against other endpoints
            best = None
            for j, s2 in enumerate(segs):
                if i == j:
                    continue
                for which2, p2 in endpoints(s2):
                    d = p1.dist(p2)
                    if d < 1e-9 or d > C.SNAP_ENDPOINT_GAP:
                        continue
                    if _fold(s1.angle() - s2.angle()) < math.radians(5):
                        continue  # near-parallel: no stable intersection
                    x = _line_intersection(s1, s2)
                    if x is None:
                        continue
                    if x.dist(p1) <= C.SNAP_ENDPOINT_GAP * 2 and \
                            x.dist(p2) <= C.SNAP_ENDPOINT_GAP * 2:
                        if best is None or d < best[0]:
                            best = (d, j, which2, x)
            if best is not None:
                _, j, which2, x = best
                setattr(s1, which1, x)
                setattr(segs[j], which2, x)
            else:
                # T-junction projection onto a nearby interior
                for j, s2 in enumerate(segs):
                    if i == j:
                        continue
                    q = _project_onto(s2, p1)
                    if q is not None and 1e-9 < p1.dist(q) <= C.SNAP_TJUNCTION_GAP:
                        setattr(s1, which1, q)
                        break
    _cluster_weld(segs)
    return segs


def _cluster_weld(segs: list[WorldSegment], tol: float = 0.3):
    """Multi-way junctions: endpoints within tol collapse to their centroid
    (pairwise snapping can chain-displace three-wall corners)."""
    entries = [(i, which) for i in range(len(segs)) for which in ("a", "b")]
    parent = list(range(len(entries)))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    pts = [getattr(segs[i], which) for i, which in entries]
    for x in range(len(entries)):
        for y in range(x + 1, len(entries)):
            if entries[x][0] == entries[y][0]:
                continue
            if pts[x].dist(pts[y]) <= tol:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[max(rx, ry)] = min(rx, ry)
    groups: dict[int, list[int]] = {}
    for k in range(len(entries)):
        groups.setdefault(find(k), []).append(k)
    for members in groups.values():
        if len(members) < 2:
            continue
        cx = sum(pts[k].x for k in members) / len(members)
        cy = sum(pts[k].y for k in members) / len(members)
        centroid = Point2(cx, cy)
        for k in members:
            i, which = entries[k]
            setattr(segs[i], which, centroid)


def weld_arc_tips(segments: list[WorldSegment],
                  arcs: list[ArcWall]) -> list[ArcWall]:
    """Join arc endpoints with nearby line endpoints: the line endpoint snaps
    onto the circle, and the arc re-spans so its tip lands exactly there.
    Line endpoints near an arc's interior snap radially onto the curve."""
    out: list[ArcWall] = []
    for arc in arcs:
        a0, sweep, ccw = arc.start_angle, arc.sweep, arc.ccw
        end_angle = a0 + (sweep if ccw else -sweep)
        for tip_name in ("start", "end"):
            tip = (Point2(arc.center.x + arc.radius * math.cos(a0),
                          arc.center.y + arc.radius * math.sin(a0))
                   if tip_name == "start" else
                   Point2(arc.center.x + arc.radius * math.cos(end_angle),
                          arc.center.y + arc.radius * math.sin(end_angle)))
            partners = []
            for s in segments:
                for which in ("a", "b"):
                    q = getattr(s, which)
                    d = tip.dist(q)
                    if d <= C.SNAP_ENDPOINT_GAP:
                        partners.append((d, s, which, q))
            if not partners:
                continue
            partners.sort(key=lambda t: t[0])
            _, s, which, q = partners[0]
            r_vec = q - arc.center
            norm = math.hypot(r_vec.x, r_vec.y)
            if norm < 1e-9:
                continue
            on_circle = Point2(arc.center.x + arc.radius * r_vec.x / norm,
                               arc.center.y + arc.radius * r_vec.y / norm)
            # every wall meeting the tip lands on the same junction point
            for _, s2, which2, _ in partners:
                setattr(s2, which2, on_circle)
            t_ang = math.atan2(on_circle.y - arc.center.y,
                               on_circle.x - arc.center.x)
            if tip_name == "start":
                a0 = t_ang
            else:
                end_angle = t_ang
        sweep_new = ((end_angle - a0) if ccw else (a0 - end_angle)) % (2 * math.pi)
        if sweep_new > 1e-6:
            out.append(ArcWall(arc.id, arc.center, arc.radius, a0, sweep_new,
                               ccw, arc.thickness, arc.height))
        else:
            out.append(arc)
    # line endpoints resting on an arc's interior snap radially onto it
    for s in segments:
        for which in ("a", "b"):
            p = getattr(s, which)
            for arc in out:
                radial = abs(p.dist(arc.center) - arc.radius)
                if radial < 1e-9 or radial > C.SNAP_TJUNCTION_GAP:
                    continue
                ang = math.atan2(p.y - arc.center.y, p.x - arc.center.x)
                rel = (ang - arc.start_angle) * (1.0 if arc.ccw else -1.0)
                rel %= 2 * math.pi
                if rel <= arc.sweep:
                    setattr(s, which,
                            Point2(arc.center.x + arc.radius * math.cos(ang),
                                   arc.center.y + arc.radius * math.sin(ang)))
                    break
    return out


def _line_intersection(s1: WorldSegment, s2: WorldSegment) -> Point2 | None:
    x1, y1, x2, y2 = s1.a.x, s1.a.y, s1.b.x, s1.b.y
    x3, y3, x4, y4 = s2.a.x, s2.a.y, s2.b.x, s2.b.y
    denom = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4)
    if abs(denom) < 1e-12:
        return None
    px = ((x1 * y2 - y1 * x2) * (x3 - x4) - (x1 - x2) * (x3 * y4 - y3 * x4)) / denom
    py = ((x1 * y2 - y1 * x2) * (y3 - y4) - (y1 - y2) * (x3 * y4 - y3 * x4)) / denom
    return Point2(px, py)


def _project_onto(s: WorldSegment, p: Point2) -> Point2 | None:
    length = s.length()
    if length < 1e-9:
        return None
    ux = (s.b.x - s.a.x) / length
    uy = (s.b.y - s.a.y) / length
    t = (p.x - s.a.x) * ux + (p.y - s.a.y) * uy
    if t < C.CONNECT_TOL or t > length - C.CONNECT_TOL:
        return None
    return Point2(s.a.x + t * ux, s.a.y + t * uy)


def node_and_build_walls(segments: list[WorldSegment],
                         arcs: list[ArcWall]) -> list[Wall]:
    """Split everything at mutual intersections; emit walls with temp ids."""
    walls: list[Wall] = []
    for k, s in enumerate(_canonical_order(segments)):
        walls.append(LineWall(f"tmpL{k}", s.a, s.b, s.thickness))
    for k, a in enumerate(arcs):
        walls.append(ArcWall(f"tmpA{k}", a.center, a.radius, a.start_angle,
                             a.sweep, a.ccw, a.thickness, a.height))
    pieces = planar.node_walls(walls)
    out: list[Wall] = []
    thickness_of = {w.id: w.thickness for w in walls}
    for k, piece in enumerate(sorted(
            pieces, key=lambda p: (round(p.a.x, 3), round(p.a.y, 3),
                                   round(p.b.x, 3), round(p.b.y, 3)))):
        th = thickness_of.get(piece.source_id, C.DEFAULT_WALL_THICKNESS)
        if piece.kind == "line":
            out.append(LineWall(f"w{k}", piece.a, piece.b, th))
        else:
            sweep = (piece.ang_b - piece.ang_a) if piece.ccw else \
                    (piece.ang_a - piece.ang_b)
            sweep = sweep % (2 * math.pi)
            out.append(ArcWall(f"w{k}", piece.center, piece.radius, piece.ang_a,
                               sweep, piece.ccw, th))
    return out


def retain_stubs(walls: list[Wall]) -> tuple[list[Wall], list[str]]:
    """Drop fragments shorter than the floor; keep short walls only when they
    join two longer walls at a real turn and bound a room."""
    log: list[str] = []
    survivors = [w for w in walls if wall_length(w) >= C.STUB_MIN_LENGTH]
    dropped = len(walls) - len(survivors)
    if dropped:
        log.append(f"stubs: removed {dropped} fragment(s) below "
                   f"{C.STUB_MIN_LENGTH} ft")

    short = [w for w in survivors if wall_length(w) < C.STUB_REVIEW_LENGTH]
    if not short:
        return survivors, log

    bounded_ids: set[str] = set()
    try:
        for face in planar.bounded_faces(planar.node_walls(survivors)):
            for e in face.edges:
                bounded_ids.add(e.piece.source_id)
    except planar.NoBoundedFace:
        pass

    def neighbors_at(wall: Wall, p: Point2) -> list[Wall]:
        out = []
        for other in survivors:
            if other is wall:
                continue
            if min(other.start.dist(p), other.end.dist(p)) <= C.CONNECT_TOL:
                out.append(other)
        return out

    def direction(w: Wall) -> float:
        return math.atan2(w.end.y - w.start.y, w.end.x - w.start.x) % math.pi

    keep: list[Wall] = []
    for w in survivors:
        if wall_length(w) >= C.STUB_REVIEW_LENGTH:
            keep.append(w)
            continue
        if w.id not in bounded_ids:
            log.append(f"stubs: removed {w.id} ({wall_length(w):.2f} ft, "
                       "no bounded face)")
            continue
        ok_ends = 0
        for p in (w.start, w.end):
            longer = [n for n in neighbors_at(w, p)
                      if wall_length(n) > wall_length(w)]
            if isinstance(w, LineWall):
                turns = [_fold(direction(w) - direction(n)) for n in longer
                         if isinstance(n, LineWall)]
                turns += [math.pi / 4 for n in longer if isinstance(n, ArcWall)]
            else:
                turns = [math.pi / 4 for n in longer]
            if any(t >= math.radians(C.STUB_MIN_TURN_DEG) for t in turns):
                ok_ends += 1
        if ok_ends == 2:
            keep.append(w)
        else:
            log.append(f"stubs: removed {w.id} ({wall_length(w):.2f} ft, "
                       "no qualifying turns)")
    return keep, log
