import math

import pytest
from hypothesis import given, strategies as st

from planforge import geometry as G
from planforge.geometry import (ArcWall, LineWall, Opening, Point2, Room,
                                arc_from_3pt, assign_canonical_ids,
                                dumps_layout, layout_from_doc, layout_to_doc,
                                loads_layout, normalize_sweep, opening_world_span,
                                signed_area, wall_length, wall_point_at)


def test_arc_from_3pt_half_circle():
    # perpendicular-bisector oracle: center is equidistant from all three
    geom = arc_from_3pt(Point2(0, 0), Point2(5, 5), Point2(10, 0))
    assert geom.center.dist(Point2(5, 0)) < 1e-9
    assert abs(geom.radius - 5.0) < 1e-9
    assert abs(geom.sweep - math.pi) < 1e-9
    assert geom.ccw is False  # clockwise point order
    for p in (Point2(0, 0), Point2(5, 5), Point2(10, 0)):
        assert abs(geom.center.dist(p) - geom.radius) < 1e-9


def test_arc_from_3pt_larger():
    geom = arc_from_3pt(Point2(0, 0), Point2(10, 10), Point2(20, 0))
    assert geom.center.dist(Point2(10, 0)) < 1e-9
    assert abs(geom.radius - 10.0) < 1e-9
    assert abs(geom.sweep - math.pi) < 1e-9


def test_arc_from_3pt_collinear():
    with pytest.raises(G.CollinearPoints):
        arc_from_3pt(Point2(0, 0), Point2(5, 0), Point2(10, 0))


@given(st.floats(min_value=0.5, max_value=40),
       st.floats(min_value=0, max_value=2 * math.pi),
       st.floats(min_value=0.1, max_value=2 * math.pi - 0.1),
       st.booleans())
def test_arc_3pt_roundtrip(radius, start, sweep, ccw):
    # sampling start/mid/end and refitting reproduces the circle
    wall = ArcWall("w", Point2(3, -2), radius, start, sweep, ccw)
    length = wall_length(wall)
    p0 = wall_point_at(wall, 0)
    pm = wall_point_at(wall, length / 2)
    p1 = wall_point_at(wall, length)
    geom = arc_from_3pt(p0, pm, p1)
    assert abs(geom.radius - radius) < 1e-6
    assert geom.center.dist(Point2(3, -2)) < 1e-6
    assert abs(geom.sweep - sweep) < 1e-6
    assert geom.ccw == ccw


def test_normalize_sweep():
    assert abs(normalize_sweep(-math.pi / 2) - 3 * math.pi / 2) < 1e-12
    assert abs(normalize_sweep(2 * math.pi + 0.1) - 0.1) < 1e-12
    with pytest.raises(G.FullCircle):
        normalize_sweep(2 * math.pi)
    with pytest.raises(G.FullCircle):
        normalize_sweep(0.0)


@given(st.floats(min_value=-50, max_value=50).filter(
    lambda v: abs(math.fmod(v, 2 * math.pi)) > 1e-6
    and abs(abs(math.fmod(v, 2 * math.pi)) - 2 * math.pi) > 1e-6))
def test_normalize_sweep_congruent(raw):
    s = normalize_sweep(raw)
    assert 0 < s < 2 * math.pi
    assert abs(math.fmod(s - raw, 2 * math.pi)) < 1e-6 or \
        abs(abs(math.fmod(s - raw, 2 * math.pi)) - 2 * math.pi) < 1e-6


def test_wall_length():
    assert wall_length(LineWall("w", Point2(0, 0), Point2(3, 4))) == 5.0
    arc = ArcWall("a", Point2(0, 0), 10.0, 0.0, math.pi, True)
    assert abs(wall_length(arc) - 31.4159) < 1e-4
    assert wall_length(LineWall("z", Point2(1, 1), Point2(1, 1))) == 0.0


@given(st.floats(min_value=0.1, max_value=30),
       st.floats(min_value=0.05, max_value=2 * math.pi - 0.05))
def test_arc_length_is_radius_times_sweep(radius, sweep):
    arc = ArcWall("a", Point2(0, 0), radius, 0.3, sweep, True)
    assert abs(wall_length(arc) - radius * normalize_sweep(sweep)) < 1e-9


def test_opening_span_line():
    host = LineWall("w", Point2(0, 0), Point2(10, 0))
    door = Opening("d", "door", "w", 5.0, 3.0, 7.0)
    a, b = opening_world_span(door, host)
    assert a.dist(Point2(3.5, 0)) < 1e-9
    assert b.dist(Point2(6.5, 0)) < 1e-9


def test_opening_span_arc_tangent_chord():
    # quarter-arc of radius 20, window width 4 centered mid-arc:
    # chord endpoints 2.0 ft from the tangent point, chord perpendicular to radius
    host = ArcWall("a", Point2(0, 0), 20.0, 0.0, math.pi / 2, True)
    length = wall_length(host)
    win = Opening("win", "window", "a", length / 2, 4.0, 4.0, 3.0)
    a, b = opening_world_span(win, host)
    centre = wall_point_at(host, length / 2)
    assert abs(a.dist(centre) - 2.0) < 1e-9
    assert abs(b.dist(centre) - 2.0) < 1e-9
    # chord direction is perpendicular to the radius at the tangent point
    rx, ry = centre.x, centre.y
    cx, cy = b.x - a.x, b.y - a.y
    assert abs(rx * cx + ry * cy) < 1e-6


def test_opening_off_wall():
    host = LineWall("w", Point2(0, 0), Point2(10, 0))
    with pytest.raises(G.OffWall):
        opening_world_span(Opening("d", "door", "w", 0.5, 3.0, 7.0), host)


def test_signed_area():
    sq = [Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)]
    assert signed_area(sq) == 1.0
    assert signed_area(list(reversed(sq))) == -1.0
    tri = [Point2(0, 0), Point2(4, 0), Point2(0, 3)]
    assert signed_area(tri) == 6.0
    with pytest.raises(G.TooFewVertices):
        signed_area([Point2(0, 0), Point2(1, 1)])


@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
                min_size=3, max_size=12))
def test_signed_area_reversal(coords):
    poly = [Point2(x, y) for x, y in coords]
    assert abs(signed_area(list(reversed(poly))) + signed_area(poly)) < 1e-6


def _square_layout() -> G.Layout:
    walls = [
        LineWall("wA", Point2(0, 0), Point2(10, 0)),
        LineWall("wB", Point2(10, 0), Point2(10, 10)),
        LineWall("wC", Point2(10, 10), Point2(0, 10)),
        LineWall("wD", Point2(0, 10), Point2(0, 0)),
    ]
    door = Opening("dX", "door", "wA", 5.0, 3.0, 7.0)
    room = Room("rX", [Point2(0, 0), Point2(10, 0), Point2(10, 10), Point2(0, 10)],
                ["wA", "wB", "wC", "wD"])
    return G.Layout(walls=walls, doors=[door], rooms=[room])


def test_canonical_ids_square():
    out = assign_canonical_ids(_square_layout())
    ids = [w.id for w in out.walls]
    assert ids == ["wall1", "wall2", "wall3", "wall4"]
    # boundary numbering starts at the lexicographically smallest midpoint
    # (the left wall, midpoint (0,5)) and proceeds CCW: left, bottom, right, top
    mids = [G.wall_midpoint(w).as_tuple() for w in out.walls]
    assert mids[0] == (0.0, 5.0)
    assert mids[1] == (5.0, 0.0)
    assert mids[2] == (10.0, 5.0)
    assert mids[3] == (5.0, 10.0)
    assert out.doors[0].id == "door1"
    assert out.doors[0].host == "wall2"
    assert out.rooms[0].id == "room1"


def test_canonical_interior_order():
    lay = _square_layout()
    # two interior walls at x=3 and x=7: x=3 gets the lower number
    lay.walls.append(LineWall("wZ", Point2(7, 0), Point2(7, 10)))
    lay.walls.append(LineWall("wY", Point2(3, 0), Point2(3, 10)))
    out = assign_canonical_ids(lay)
    by_id = {w.id: w for w in out.walls}
    interior = [w for w in out.walls if G.wall_midpoint(w).x in (3.0, 7.0)]
    assert len(interior) == 2
    first = min(interior, key=lambda w: int(w.id.removeprefix("wall")))
    assert G.wall_midpoint(first).x == 3.0
    assert len(by_id) == len(out.walls)


def test_canonical_idempotent():
    once = assign_canonical_ids(_square_layout())
    twice = assign_canonical_ids(once)
    assert dumps_layout(once) == dumps_layout(twice)
    # geometry preserved
    src = sorted((G.wall_midpoint(w).as_tuple() for w in _square_layout().walls))
    dst = sorted((G.wall_midpoint(w).as_tuple() for w in once.walls))
    assert src == dst


def test_serialize_roundtrip_byte_identical():
    lay = assign_canonical_ids(_square_layout())
    text = dumps_layout(lay)
    again = dumps_layout(loads_layout(text))
    assert text == again


def test_serialize_rounding():
    lay = G.Layout(walls=[LineWall("w1", Point2(0.123456, 0), Point2(9.999, 0.004))])
    doc = layout_to_doc(lay)
    assert doc["walls"][0]["start"] == [0.12, 0.0]
    assert doc["walls"][0]["end"] == [10.0, 0.0]


def test_arc3pt_ingest():
    doc = {"units": "feet", "walls": [
        {"id": "w1", "kind": "arc3pt", "p_start": [0, 0], "p_mid": [5, 5],
         "p_end": [10, 0], "thickness": 0.5, "height": 10.0}],
        "doors": [], "windows": [], "rooms": []}
    lay = layout_from_doc(doc)
    assert isinstance(lay.walls[0], ArcWall)
    assert abs(lay.walls[0].radius - 5.0) < 1e-9

    doc["walls"][0]["p_mid"] = [5, 0.001]  # nearly collinear
    lay2 = layout_from_doc(doc)
    assert isinstance(lay2.walls[0], LineWall)
    assert lay2.ingest_notes and lay2.ingest_notes[0][1] == "arc3pt_near_collinear"


def test_parse_failure():
    with pytest.raises(G.ParseFailure):
        loads_layout("not json {")
    with pytest.raises(G.ParseFailure):
        layout_from_doc({"walls": [{"id": "w", "kind": "hexagon"}]})
