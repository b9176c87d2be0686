"""Synthetic floor plans, hand-drawn-style renders, and scripted sessions.

The generator is the ground-truth oracle for the test suite: each template
builds a noded wall set, rooms come from the same face extractor the pipeline
uses, openings are placed by world point, and the result must validate clean.
Renders rasterize walls as jittered strokes with structured annotations
(dimension callouts, opening labels, optional swing arcs) in the sidecar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import constants as C
from .extract.openings import _distance_and_param
from .extract.pipeline import DimensionCallout, SketchBundle
from .extract.rooms import extract_rooms
from .geometry import (ArcWall, Layout, LineWall, Opening, Point2, Room, Wall,
                       assign_canonical_ids, sample_arc, wall_length,
                       wall_point_at, wall_tangent_at, wall_orientation)
from .planar import node_walls
from .validate import validate

Seg = tuple[tuple[float, float], tuple[float, float]]


@dataclass
class OpeningSpec:
    cls: str                    # door | window
    at: tuple[float, float]     # world point on (or next to) a wall
    width: float | None = None
    swing: bool = False         # render as a swing arc instead of a label


@dataclass
class PlanCase:
    name: str
    layout: Layout
    skew_deg: float
    ppf: float                  # render pixels per foot
    swing_doors: list[str]


def _arc_between(p1: tuple[float, float], p2: tuple[float, float],
                 radius: float, bulge_left: bool) -> ArcWall:
    """Arc from p1 to p2 with the given radius, bulging left/right of p1->p2."""
    a = Point2(*p1)
    b = Point2(*p2)
    chord = a.dist(b)
    if radius < chord / 2.0:
        raise ValueError("radius smaller than half chord")
    mx, my = (a.x + b.x) / 2.0, (a.y + b.y) / 2.0
    ux, uy = (b.x - a.x) / chord, (b.y - a.y) / chord
    h = math.sqrt(radius * radius - (chord / 2.0) ** 2)
    nx, ny = (-uy, ux) if bulge_left else (uy, -ux)
    # center sits opposite the bulge
    cx, cy = mx - nx * h, my - ny * h
    center = Point2(cx, cy)
    a1 = math.atan2(a.y - cy, a.x - cx)
    a2 = math.atan2(b.y - cy, b.x - cx)
    ccw = not bulge_left if False else None
    # choose the orientation whose midpoint bulges to the requested side
    for ccw_try in (True, False):
        sweep = ((a2 - a1) if ccw_try else (a1 - a2)) % (2 * math.pi)
        if sweep == 0:
            continue
        mid_ang = a1 + (sweep / 2.0) * (1 if ccw_try else -1)
        mid = Point2(cx + radius * math.cos(mid_ang),
                     cy + radius * math.sin(mid_ang))
        side = (b.x - a.x) * (mid.y - a.y) - (b.y - a.y) * (mid.x - a.x)
        if (side > 0) == bulge_left and sweep < math.pi + 1e-9:
            return ArcWall("arc", center, radius, a1, sweep, ccw_try)
    raise ValueError("arc orientation not found")


def build_layout(segments: list[Seg], arcs: list[ArcWall],
                 openings: list[OpeningSpec]) -> Layout:
    """Assemble a validated ground-truth layout from centerlines."""
    walls: list[Wall] = [LineWall(f"g{i}", Point2(*a), Point2(*b))
                         for i, (a, b) in enumerate(segments)]
    for i, arc in enumerate(arcs):
        walls.append(replace(arc, id=f"ga{i}"))
    pieces = node_walls(walls)
    noded: list[Wall] = []
    for k, piece in enumerate(pieces):
        if piece.kind == "line":
            noded.append(LineWall(f"n{k}", piece.a, piece.b))
        else:
            sweep = ((piece.ang_b - piece.ang_a) if piece.ccw
                     else (piece.ang_a - piece.ang_b)) % (2 * math.pi)
            noded.append(ArcWall(f"n{k}", piece.center, piece.radius,
                                 piece.ang_a, sweep, piece.ccw))

    # normalize: bbox min corner at the origin (eval translation convention)
    xs, ys = [], []
    for w in noded:
        pts = [w.start, w.end] if isinstance(w, LineWall) else sample_arc(w, 0.02)
        xs += [p.x for p in pts]
        ys += [p.y for p in pts]
    dx, dy = -min(xs), -min(ys)
    shifted: list[Wall] = []
    for w in noded:
        if isinstance(w, LineWall):
            shifted.append(LineWall(w.id, Point2(w.start.x + dx, w.start.y + dy),
                                    Point2(w.end.x + dx, w.end.y + dy)))
        else:
            shifted.append(ArcWall(w.id, Point2(w.center.x + dx, w.center.y + dy),
                                   w.radius, w.start_angle, w.sweep, w.ccw))
    noded = shifted

    rooms, _ = extract_rooms(noded)
    layout = Layout(walls=noded, rooms=rooms)
    counter = {"door": 0, "window": 0}
    for spec in openings:
        p = Point2(spec.at[0] + dx, spec.at[1] + dy)
        host, t, best = None, 0.0, math.inf
        for w in noded:
            d, param = _distance_and_param(w, p)
            if d < best:
                host, t, best = w, param, d
        if host is None or best > 0.1:
            raise ValueError(f"opening spec at {spec.at} is {best:.3f} ft off any wall")
        width = spec.width or (C.DOOR_WIDTH_DEFAULT if spec.cls == "door"
                               else C.WINDOW_WIDTH_DEFAULT)
        counter[spec.cls] += 1
        prefix = "door" if spec.cls == "door" else "win"
        opening = Opening(f"tmp_{prefix}{counter[spec.cls]}", spec.cls, host.id,
                          round(t, 2), width,
                          C.DEFAULT_DOOR_HEIGHT if spec.cls == "door"
                          else C.DEFAULT_WINDOW_HEIGHT,
                          None if spec.cls == "door" else C.DEFAULT_WINDOW_SILL)
        (layout.doors if spec.cls == "door" else layout.windows).append(opening)

    # round to serialization precision, then relabel canonically
    for i, w in enumerate(layout.walls):
        if isinstance(w, LineWall):
            layout.walls[i] = LineWall(w.id, Point2(round(w.start.x, 2), round(w.start.y, 2)),
                                       Point2(round(w.end.x, 2), round(w.end.y, 2)))
        else:
            layout.walls[i] = ArcWall(w.id, Point2(round(w.center.x, 2), round(w.center.y, 2)),
                                      round(w.radius, 2), round(w.start_angle, 6),
                                      round(w.sweep, 6), w.ccw)
    for room in layout.rooms:
        room.polygon = [Point2(round(p.x, 2), round(p.y, 2)) for p in room.polygon]
    layout = assign_canonical_ids(layout)
    report = validate(layout)
    if not report.passes:
        raise AssertionError(
            f"generated layout invalid: {[v.message for v in report.violations]}")
    return layout


# ---------------------------------------------------------------------------
# Templates (mirror the evaluation set's class mix)
# ---------------------------------------------------------------------------

def _t01() -> PlanCase:
    segs = [((0, 0), (30, 0)), ((30, 0), (30, 20)), ((30, 20), (0, 20)),
            ((0, 20), (0, 0)), ((12, 0), (12, 20)), ((12, 10), (30, 10))]
    ops = [OpeningSpec("door", (6, 0)), OpeningSpec("door", (12, 5)),
           OpeningSpec("window", (0, 10)), OpeningSpec("window", (21, 20)),
           OpeningSpec("window", (30, 5))]
    return PlanCase("t01", build_layout(segs, [], ops), 0.0, 10.0, [])


def _t02() -> PlanCase:
    segs = [((0, 0), (40, 0)), ((40, 0), (40, 24)), ((40, 24), (0, 24)),
            ((0, 24), (0, 0)), ((14, 0), (14, 24)), ((27, 0), (27, 24)),
            ((14, 12), (40, 12))]
    ops = [OpeningSpec("door", (7, 0)), OpeningSpec("door", (14, 6)),
           OpeningSpec("door", (27, 18)),
           OpeningSpec("window", (0, 12)), OpeningSpec("window", (20, 24)),
           OpeningSpec("window", (40, 6)), OpeningSpec("window", (40, 18))]
    return PlanCase("t02", build_layout(segs, [], ops), 0.0, 10.0, [])


def _t03() -> PlanCase:
    # chamfered footprint (octagonal outline), skewed render
    segs = [((5, 0), (31, 0)), ((31, 0), (36, 5)), ((36, 5), (36, 21)),
            ((36, 21), (31, 26)), ((31, 26), (5, 26)), ((5, 26), (0, 21)),
            ((0, 21), (0, 5)), ((0, 5), (5, 0)),
            ((14, 0), (14, 26)), ((0, 13), (36, 13)), ((25, 0), (25, 13))]
    ops = [OpeningSpec("door", (9, 0)), OpeningSpec("door", (14, 7)),
           OpeningSpec("door", (25, 6)),
           OpeningSpec("window", (0, 9)), OpeningSpec("window", (20, 26)),
           OpeningSpec("window", (36, 9)), OpeningSpec("window", (36, 17))]
    return PlanCase("t03", build_layout(segs, [], ops), 4.0, 10.0, [])


def _t04() -> PlanCase:
    segs = [((4, 0), (26, 0)), ((26, 0), (30, 4)), ((30, 4), (30, 22)),
            ((30, 22), (0, 22)), ((0, 22), (0, 4)), ((0, 4), (4, 0)),
            ((11, 0), (11, 22)), ((20, 0), (20, 22))]
    ops = [OpeningSpec("door", (7, 0)), OpeningSpec("door", (11, 12)),
           OpeningSpec("window", (0, 12)), OpeningSpec("window", (15, 22)),
           OpeningSpec("window", (30, 12))]
    return PlanCase("t04", build_layout(segs, [], ops), 0.0, 11.0, [])


def _t05() -> PlanCase:
    segs = [((0, 0), (38, 0)), ((38, 0), (38, 26)), ((38, 26), (0, 26)),
            ((0, 26), (0, 0)), ((13, 0), (13, 26)), ((26, 0), (26, 26)),
            ((0, 13), (13, 13)), ((26, 13), (38, 13))]
    ops = [OpeningSpec("door", (7, 0)), OpeningSpec("door", (13, 19)),
           OpeningSpec("door", (26, 7)),
           OpeningSpec("window", (0, 6)), OpeningSpec("window", (0, 20)),
           OpeningSpec("window", (19, 26)), OpeningSpec("window", (38, 7))]
    return PlanCase("t05", build_layout(segs, [], ops), 7.0, 10.0, [])


def _t06() -> PlanCase:
    # seven rooms with a trapezoidal corner
    segs = [((0, 0), (44, 0)), ((44, 0), (44, 18)), ((44, 18), (36, 26)),
            ((36, 26), (0, 26)), ((0, 26), (0, 0)),
            ((11, 0), (11, 26)), ((22, 0), (22, 26)), ((33, 0), (33, 26)),
            ((0, 13), (22, 13)), ((33, 13), (44, 13))]
    ops = [OpeningSpec("door", (5, 0)), OpeningSpec("door", (11, 6)),
           OpeningSpec("door", (22, 20)), OpeningSpec("door", (33, 7)),
           OpeningSpec("window", (0, 7)), OpeningSpec("window", (0, 20)),
           OpeningSpec("window", (16, 26)), OpeningSpec("window", (44, 6))]
    return PlanCase("t06", build_layout(segs, [], ops), -5.0, 9.0, [])


def _t07() -> PlanCase:
    arc = _arc_between((30, 0), (30, 20), 11.0, bulge_left=False)
    segs = [((0, 0), (30, 0)), ((30, 20), (0, 20)), ((0, 20), (0, 0)),
            ((12, 0), (0, 8)), ((20, 0), (20, 20))]
    ops = [OpeningSpec("door", (16, 0), swing=True), OpeningSpec("door", (20, 10)),
           OpeningSpec("window", (0, 14)), OpeningSpec("window", (10, 20)),
           OpeningSpec("window", (36.5, 10))]
    case = PlanCase("t07", build_layout(segs, [arc], ops), 0.0, 10.0, [])
    case.swing_doors = [d.id for d in case.layout.doors
                        if abs(wall_point_at(case.layout.wall_by_id(d.host),
                                             d.offset).y) < 0.5]
    return case


def _t08() -> PlanCase:
    arc = _arc_between((34, 0), (34, 24), 14.0, bulge_left=False)
    cx = 34.0 - math.sqrt(14.0 ** 2 - 12.0 ** 2)  # arc center x
    hx = cx + 14.0                                # arc x at mid height
    segs = [((0, 0), (34, 0)), ((34, 24), (0, 24)), ((0, 24), (0, 0)),
            ((12, 0), (12, 24)), ((12, 12), (hx, 12)), ((0, 8), (12, 11))]
    ops = [OpeningSpec("door", (6, 0)), OpeningSpec("door", (12, 18)),
           OpeningSpec("door", (12, 5)),
           OpeningSpec("window", (0, 16)), OpeningSpec("window", (20, 24)),
           OpeningSpec("window", (20, 0))]
    return PlanCase("t08", build_layout(segs, [arc], ops), 0.0, 10.0, [])


def _t09() -> PlanCase:
    arc = _arc_between((13, 0), (13, 26), 20.0, bulge_left=False)
    segs = [((0, 0), (40, 0)), ((40, 0), (40, 20)), ((40, 20), (34, 26)),
            ((34, 26), (0, 26)), ((0, 26), (0, 0)),
            ((27, 0), (27, 26)), ((0, 13), (27, 13))]
    ops = [OpeningSpec("door", (20, 0)), OpeningSpec("door", (27, 19)),
           OpeningSpec("door", (3, 13)),
           OpeningSpec("window", (0, 6)), OpeningSpec("window", (0, 20)),
           OpeningSpec("window", (20, 26)), OpeningSpec("window", (40, 10)),
           OpeningSpec("window", (33, 0))]
    return PlanCase("t09", build_layout(segs, [arc], ops), 6.0, 9.5, [])


def _t10() -> PlanCase:
    gt, _, _, _ = p10_analog()
    return PlanCase("t10", gt, -4.0, 10.0, [])


def suite(n: int = 10) -> list[PlanCase]:
    builders = [_t01, _t02, _t03, _t04, _t05, _t06, _t07, _t08, _t09, _t10]
    return [b() for b in builders[:n]]


# ---------------------------------------------------------------------------
# Scripted analog session: curved/trapezoidal five-room plan whose seven
# feedback steps restore ground truth exactly
# ---------------------------------------------------------------------------

def p10_analog() -> tuple[Layout, Layout, list[str], dict]:
    """(ground_truth, initial_layout, feedback_script, notes).

    The initial layout carries the defects the script repairs: one wall
    displaced onto its neighbour, one wall shortened at both ends, one wall
    aimed at the wrong junction, one shortened at the bottom, two doors
    nudged inside their matching gates, one window displaced by a host
    shrink, all engineered so doors stay fully matched from iteration 0 and
    the final layout equals ground truth exactly.
    """
    th, hh = C.DEFAULT_WALL_THICKNESS, C.DEFAULT_WALL_HEIGHT
    arc = _arc_between((44, 18), (44, 34), 10.0, bulge_left=False)

    def lw(wid, a, b):
        return LineWall(wid, Point2(*a), Point2(*b), th, hh)

    walls: list[Wall] = [
        lw("wall1", (0, 0), (28, 0)),
        lw("wall2", (0, 18), (20, 18)),
        lw("wall3", (28, 0), (28, 26)),
        lw("wall4", (6, 34), (28, 26)),
        lw("wall5", (44, 34), (6, 34)),
        lw("wall6", (28, 0), (44, 0)),
        lw("wall7", (0, 0), (0, 18)),
        lw("wall8", (0, 26), (20, 26)),
        lw("wall9", (44, 0), (44, 18)),
        ArcWall("wall10", arc.center, arc.radius, arc.start_angle, arc.sweep,
                arc.ccw, th, hh),
        lw("wall11", (0, 26), (0, 18)),
        lw("wall12", (6, 34), (0, 26)),
        lw("wall13", (20, 18), (28, 0)),
        lw("wall14", (20, 18), (20, 26)),
        lw("wall15", (28, 26), (44, 18)),
    ]
    doors = [
        Opening("door1", "door", "wall8", 17.75, 3.0, 7.0),
        Opening("door2", "door", "wall1", 10.0, 3.0, 7.0),
        Opening("door3", "door", "wall8", 2.25, 3.0, 7.0),
        Opening("door4", "door", "wall13", 9.0, 3.0, 7.0),
        Opening("door5", "door", "wall14", 4.0, 3.0, 7.0),
    ]
    windows = [
        Opening("win1", "window", "wall9", 9.0, 4.5, 4.0, 3.0),
        Opening("win2", "window", "wall3", 7.0, 4.5, 4.0, 3.0),
        Opening("win3", "window", "wall5", 10.0, 4.5, 4.0, 3.0),
        Opening("win4", "window", "wall5", 24.0, 4.5, 4.0, 3.0),
        Opening("win5", "window", "wall7", 12.0, 4.5, 4.0, 3.0),
        Opening("win6", "window", "wall10", round(arc.radius * arc.sweep / 2, 2),
                4.5, 4.0, 3.0),
        Opening("win7", "window", "wall12", 5.0, 4.5, 4.0, 3.0),
        Opening("win8", "window", "wall15", 9.0, 4.5, 4.0, 3.0),
    ]
    rooms_raw, _ = extract_rooms(walls)
    rooms = [Room(f"room{i + 1}",
                  [Point2(round(p.x, 2), round(p.y, 2)) for p in r.polygon],
                  r.wall_chain)
             for i, r in enumerate(rooms_raw)]
    gt = Layout(walls=walls, doors=doors, windows=windows, rooms=rooms)
    report = validate(gt)
    if not report.passes:
        raise AssertionError(
            f"analog GT invalid: {[v.message for v in report.violations]}")

    import copy
    j0 = copy.deepcopy(gt)
    j0.walls[j0.walls.index(j0.wall_by_id("wall2"))] = lw("wall2", (0, 26), (20, 26))
    j0.walls[j0.walls.index(j0.wall_by_id("wall3"))] = lw("wall3", (28, 8), (28, 18))
    j0.walls[j0.walls.index(j0.wall_by_id("wall4"))] = lw("wall4", (6, 34), (28, 18))
    j0.walls[j0.walls.index(j0.wall_by_id("wall7"))] = lw("wall7", (0, 8), (0, 18))
    j0.opening_by_id("door1").offset = 17.2
    d3 = j0.opening_by_id("door3")
    d3.host, d3.offset = "wall2", 2.85
    j0.opening_by_id("win5").offset = 4.0
    # win2 keeps its stored fields; the shrunken host moves it 8 ft up in world

    script = [
        "Move door 3 to wall 8",
        "Move door 1 to wall 8",
        "Move door 1 eight feet to the right, move door 3 two feet to the left, "
        "and move wall 2 downward by 8 feet",
        "Extend wall 7 and wall 3 downward by 8 feet",
        "Move window 2 downward by 8 feet",
        "Extend wall 3 upward by 8 feet",
        "Connect wall 4 with the top end of wall 3, while keeping the left end "
        "of wall 4 connected to wall 5",
    ]
    notes = {"walls": 15, "doors": 5, "windows": 8, "rooms": 5,
             "expected_j0_dangles": 4}
    return gt, j0, script, notes


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _stroke_runs(walls: list[Wall], step_ft: float = 0.08) -> list[list[Point2]]:
    """Group walls into maximal collinear (or co-circular) chains and sample
    each chain as one polyline."""
    n = len(walls)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    def fold(a: float) -> float:
        d = abs(a) % math.pi
        return min(d, math.pi - d)

    for i in range(n):
        for j in range(i + 1, n):
            wi, wj = walls[i], walls[j]
            if isinstance(wi, LineWall) and isinstance(wj, LineWall):
                ai = math.atan2(wi.end.y - wi.start.y, wi.end.x - wi.start.x)
                aj = math.atan2(wj.end.y - wj.start.y, wj.end.x - wj.start.x)
                if fold(ai - aj) > math.radians(2.0):
                    continue
                touch = min(p.dist(q) for p in (wi.start, wi.end)
                            for q in (wj.start, wj.end))
                if touch < 0.1:
                    union(i, j)
            elif isinstance(wi, ArcWall) and isinstance(wj, ArcWall):
                if (wi.center.dist(wj.center) < 0.1
                        and abs(wi.radius - wj.radius) < 0.1):
                    touch = min(p.dist(q) for p in (wi.start, wi.end)
                                for q in (wj.start, wj.end))
                    if touch < 0.1:
                        union(i, j)

    groups: dict[int, list[Wall]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(walls[i])
    runs: list[list[Point2]] = []
    for members in groups.values():
        if isinstance(members[0], LineWall):
            pts = [p for w in members for p in (w.start, w.end)]
            ang = math.atan2(members[0].end.y - members[0].start.y,
                             members[0].end.x - members[0].start.x)
            ux, uy = math.cos(ang), math.sin(ang)
            params = sorted((p.x * ux + p.y * uy, p) for p in pts)
            a, b = params[0][1], params[-1][1]
            length = a.dist(b)
            k = max(2, int(length / step_ft))
            runs.append([Point2(a.x + (b.x - a.x) * t / (k - 1),
                                a.y + (b.y - a.y) * t / (k - 1))
                         for t in range(k)])
        else:
            # order arc members by start angle and sample the union span
            total = sum(wall_length(w) for w in members)
            base: list[Point2] = []
            for w in sorted(members, key=lambda w: (w.start_angle
                                                    if w.ccw else -w.start_angle)):
                k = max(2, int(wall_length(w) / step_ft))
                base.extend(wall_point_at(w, wall_length(w) * t / (k - 1))
                            for t in range(k))
            runs.append(base)
    return runs


def render(case: PlanCase, seed: int = 0, jitter_px: float = 2.0,
           margin_px: int = 36) -> SketchBundle:
    """Rasterize a plan as jittered ink strokes with a structured sidecar."""
    layout = case.layout
    rng = np.random.default_rng(seed + 77)
    ppf = case.ppf
    skew = math.radians(case.skew_deg)

    xs, ys = [], []
    for w in layout.walls:
        pts = [w.start, w.end] if isinstance(w, LineWall) else sample_arc(w, 0.02)
        xs += [p.x for p in pts]
        ys += [p.y for p in pts]
    cx, cy = (min(xs) + max(xs)) / 2.0, (min(ys) + max(ys)) / 2.0

    def to_px_up(p: Point2) -> tuple[float, float]:
        # rotate about the plan center, then scale
        dx, dy = p.x - cx, p.y - cy
        rx = dx * math.cos(skew) - dy * math.sin(skew)
        ry = dx * math.sin(skew) + dy * math.cos(skew)
        return (rx * ppf, ry * ppf)

    pts_up = [to_px_up(Point2(x, y)) for x, y in zip(xs, ys)]
    half_w = max(abs(p[0]) for p in pts_up) + margin_px
    half_h = max(abs(p[1]) for p in pts_up) + margin_px
    width = int(math.ceil(2 * half_w))
    height = int(math.ceil(2 * half_h))

    def to_px(p: Point2) -> tuple[float, float]:
        ux, uy = to_px_up(p)
        return (ux + half_w, uy + half_h)

    def to_row_col(p: Point2) -> tuple[float, float]:
        x, y_up = to_px(p)
        return (x, (height - 1) - y_up)  # y-down raster coordinates

    grid = np.full((height, width), 255, dtype=np.uint8)

    def stamp(x: float, y_down: float):
        xi, yi = int(round(x)), int(round(y_down))
        grid[max(yi - 1, 0):yi + 1, max(xi - 1, 0):xi + 1] = 0

    # hand-drawn strokes run through junctions: render maximal collinear /
    # co-circular wall chains as single strokes with shared endpoint jitter
    for run in _stroke_runs(layout.walls):
        base = run
        samples = len(base)
        ja = rng.normal(0, jitter_px, 2)
        jb = rng.normal(0, jitter_px, 2)
        for i, p in enumerate(base):
            t = i / max(samples - 1, 1)
            x, yd = to_row_col(p)
            x += ja[0] * (1 - t) + jb[0] * t + rng.normal(0, 0.6)
            yd += ja[1] * (1 - t) + jb[1] * t + rng.normal(0, 0.6)
            stamp(x, yd)

    # dimension callouts: the longest near-horizontal and near-vertical walls
    def fold_deg(w: Wall) -> float:
        if not isinstance(w, LineWall):
            return 45.0
        return math.degrees(abs((wall_orientation(w) + math.pi / 4)
                                % (math.pi / 2) - math.pi / 4))

    lines = [w for w in layout.walls if isinstance(w, LineWall)]
    horiz = [w for w in lines if abs(math.degrees(wall_orientation(w))) < 20
             or abs(math.degrees(wall_orientation(w)) - 180) < 20]
    vert = [w for w in lines if abs(math.degrees(wall_orientation(w)) - 90) < 20]
    callouts = []
    for pool in (horiz, vert):
        if pool:
            w = max(pool, key=wall_length)
            p1 = to_row_col(w.start)
            p2 = to_row_col(w.end)
            callouts.append(DimensionCallout(p1, p2, round(wall_length(w), 2)))

    labels = []
    swings = []
    for o in layout.doors + layout.windows:
        host = layout.wall_by_id(o.host)
        centre = wall_point_at(host, o.offset)
        if o.id in case.swing_doors:
            tx, ty = wall_tangent_at(host, o.offset)
            hinge = Point2(centre.x - tx * o.width / 2.0,
                           centre.y - ty * o.width / 2.0)
            nx, ny = -ty, tx
            arcpts = []
            for k in range(9):
                ang = (math.pi / 2) * k / 8
                px = hinge.x + o.width * (tx * math.cos(ang) + nx * math.sin(ang))
                py = hinge.y + o.width * (ty * math.cos(ang) + ny * math.sin(ang))
                arcpts.append(to_row_col(Point2(px, py)))
            swings.append(arcpts)
        else:
            x, yd = to_row_col(centre)
            jx, jy = rng.normal(0, 1.0, 2)
            entry = {"p": [x + jx, yd + jy], "class": o.cls}
            if abs(o.width - (C.DOOR_WIDTH_DEFAULT if o.cls == "door"
                              else C.WINDOW_WIDTH_DEFAULT)) > 1e-9:
                entry["width_hint"] = o.width
            labels.append(entry)

    return SketchBundle(raster=grid, callouts=callouts, labels=labels,
                        swings=swings)
