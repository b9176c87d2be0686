import math

import pytest

from planforge.geometry import ArcWall, LineWall, Point2, signed_area
from planforge import planar


def square_walls(size=10.0):
    return [
        LineWall("a", Point2(0, 0), Point2(size, 0)),
        LineWall("b", Point2(size, 0), Point2(size, size)),
        LineWall("c", Point2(size, size), Point2(0, size)),
        LineWall("d", Point2(0, size), Point2(0, 0)),
    ]


def test_square_single_face():
    faces = planar.bounded_faces(planar.node_walls(square_walls()))
    assert len(faces) == 1
    assert abs(faces[0].area - 100.0) < 1e-9
    assert signed_area(faces[0].polygon) > 0


def test_two_rooms_shared_wall():
    walls = square_walls(10.0) + [LineWall("mid", Point2(5, 0), Point2(5, 10))]
    faces = planar.bounded_faces(planar.node_walls(walls))
    assert len(faces) == 2
    assert abs(sum(f.area for f in faces) - 100.0) < 1e-9


def test_t_junction_noding():
    walls = square_walls(10.0) + [LineWall("t", Point2(5, 0), Point2(5, 4))]
    pieces = planar.node_walls(walls)
    # bottom wall split at (5,0); dangling stub contributes no extra face
    bottom = [p for p in pieces if p.source_id == "a"]
    assert len(bottom) == 2
    faces = planar.bounded_faces(pieces)
    assert len(faces) == 1


def test_cross_intersection_splits_both():
    walls = [LineWall("h", Point2(0, 0), Point2(10, 0)),
             LineWall("v", Point2(5, -5), Point2(5, 5))]
    pieces = planar.node_walls(walls)
    assert len([p for p in pieces if p.source_id == "h"]) == 2
    assert len([p for p in pieces if p.source_id == "v"]) == 2


def test_arc_room_face():
    # square with the east wall replaced by an outward-bulging arc
    arc = ArcWall("arc", Point2(4, 5), math.hypot(6, 5), math.atan2(-5, 6),
                  2 * math.atan2(5, 6), True)
    walls = [
        LineWall("s", Point2(0, 0), Point2(10, 0)),
        arc,
        LineWall("n", Point2(10, 10), Point2(0, 10)),
        LineWall("w", Point2(0, 10), Point2(0, 0)),
    ]
    assert arc.start.dist(Point2(10, 0)) < 1e-9
    assert arc.end.dist(Point2(10, 10)) < 1e-9
    faces = planar.bounded_faces(planar.node_walls(walls))
    assert len(faces) == 1
    assert faces[0].area > 100.0  # bulge adds area


def test_outer_boundary_ring():
    ids = planar.outer_boundary_wall_ids(square_walls())
    assert sorted(ids) == ["a", "b", "c", "d"]
    poly = planar.outer_boundary_polygon(square_walls())
    assert signed_area(poly) > 0


def test_no_bounded_face():
    walls = [LineWall("a", Point2(0, 0), Point2(10, 0)),
             LineWall("b", Point2(0, 2), Point2(10, 2))]
    with pytest.raises(planar.NoBoundedFace):
        planar.bounded_faces(planar.node_walls(walls))


def test_min_caliper_width():
    sliver = [Point2(0, 0), Point2(20, 0), Point2(20, 1.5), Point2(0, 1.5)]
    assert abs(planar.min_caliper_width(sliver) - 1.5) < 1e-9
    square = [Point2(0, 0), Point2(5, 0), Point2(5, 5), Point2(0, 5)]
    assert abs(planar.min_caliper_width(square) - 5.0) < 1e-9


def test_point_in_polygon():
    poly = [Point2(0, 0), Point2(10, 0), Point2(10, 10), Point2(0, 10)]
    assert planar.point_in_polygon(Point2(5, 5), poly)
    assert planar.point_in_polygon(Point2(0, 5), poly)  # boundary counts
    assert not planar.point_in_polygon(Point2(15, 5), poly)
