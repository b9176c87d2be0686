import copy

import pytest
from hypothesis import given, strategies as st

from planforge import edits as E
from planforge.geometry import (Layout, LineWall, Opening, Point2, Room,
                                dumps_layout, wall_point_at)


def fixture_layout() -> Layout:
    walls = [
        LineWall("wall1", Point2(0, 10), Point2(0, 0)),
        LineWall("wall2", Point2(0, 0), Point2(20, 0)),
        LineWall("wall3", Point2(20, 0), Point2(20, 10)),
        LineWall("wall4", Point2(20, 10), Point2(0, 10)),
        LineWall("wall5", Point2(10, 0), Point2(10, 10)),
        LineWall("wall7", Point2(5, 0), Point2(5, 10)),
        LineWall("wall8", Point2(0, 6), Point2(5, 6)),
    ]
    doors = [Opening("door1", "door", "wall2", 7.5, 3.0, 7.0),
             Opening("door3", "door", "wall2", 16.0, 3.0, 7.0)]
    windows = [Opening("win1", "window", "wall4", 5.0, 4.5, 4.0, 3.0),
               Opening("win2", "window", "wall5", 5.0, 4.5, 4.0, 3.0)]
    return Layout(walls=walls, doors=doors, windows=windows)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_parse_rehost():
    cmds = E.parse_feedback("Move door 3 to wall 8")
    assert len(cmds) == 1
    assert cmds[0].verb == "ReHost"
    assert cmds[0].target == ("door", 3)
    assert cmds[0].params["dest"] == 8


def test_parse_three_clause_line():
    text = ("Move door 1 eight feet to the right, move door 3 two feet to the "
            "left, and move wall 2 downward by 8 feet")
    cmds = E.parse_feedback(text)
    assert [c.verb for c in cmds] == ["MoveBy", "MoveBy", "MoveBy"]
    assert cmds[0].params == {"direction": "right", "distance": 8.0}
    assert cmds[1].params == {"direction": "left", "distance": 2.0}
    assert cmds[2].target == ("wall", 2)
    assert cmds[2].params == {"direction": "down", "distance": 8.0}


def test_parse_connect_with_keep():
    text = ("Connect wall 4 with the top end of wall 3, while keeping the "
            "left end of wall 4 connected to wall 5")
    cmds = E.parse_feedback(text)
    assert len(cmds) == 1
    c = cmds[0]
    assert c.verb == "Connect"
    assert c.target == ("wall", 4)
    assert c.params == {"dest": 3, "dest_end": "top",
                        "keep_end": "left", "keep_wall": 5}


def test_parse_multi_target_extend():
    cmds = E.parse_feedback("Extend wall 7 and wall 3 downward by 8 feet")
    assert [c.verb for c in cmds] == ["Extend", "Extend"]
    assert cmds[0].target == ("wall", 7)
    assert cmds[1].target == ("wall", 3)


def test_parse_word_numbers_and_case():
    cmds = E.parse_feedback("MOVE WINDOW 2 DOWNWARD BY EIGHT FEET")
    assert cmds[0].verb == "MoveBy"
    assert cmds[0].params["distance"] == 8.0


def test_parse_misc_verbs():
    assert E.parse_feedback("remove wall 5")[0].verb == "Remove"
    assert E.parse_feedback("add a door to wall 3 at 6 feet")[0].verb == "Add"
    assert E.parse_feedback("set thickness of wall 2 to 0.8 feet")[0].verb == "SetThickness"
    assert E.parse_feedback("split wall 2 at 10 feet")[0].verb == "Split"
    assert E.parse_feedback("merge wall 2 and wall 3")[0].verb == "Merge"
    assert E.parse_feedback("rename door 2 to door 9")[0].verb == "RenameId"
    assert E.parse_feedback("accept")[0].verb == "Accept"
    assert E.parse_feedback("Reject")[0].verb == "Reject"


def test_unparsable_never_guesses():
    with pytest.raises(E.UnparsableClause) as exc:
        E.parse_feedback("wiggle door 3 sideways please")
    assert exc.value.suggestion  # nearest-template suggestion included


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def test_extend_downward():
    lay = Layout(walls=[LineWall("wall7", Point2(5, 0), Point2(5, 10))])
    out = E.apply_feedback(lay, "extend wall 7 downward by 8 feet")
    w = out.new_layout.walls[0]
    assert w.start.as_tuple() == (5.0, -8.0)
    assert w.end.as_tuple() == (5.0, 10.0)


def test_moveby_window_on_vertical_host():
    lay = fixture_layout()
    out = E.apply_feedback(lay, "move window 2 downward by 2 feet")
    win = out.new_layout.opening_by_id("win2")
    assert win.offset == 3.0  # host runs +y, down is negative projection


def test_accept_identity():
    lay = fixture_layout()
    out = E.apply_feedback(lay, "accept")
    assert dumps_layout(out.new_layout) == dumps_layout(lay)
    assert out.applied[0].verb == "Accept"


def test_unknown_target_layout_unchanged():
    lay = fixture_layout()
    before = dumps_layout(lay)
    with pytest.raises(E.UnknownTarget):
        E.apply_feedback(lay, "remove wall 99")
    assert dumps_layout(lay) == before


def test_atomic_batch():
    lay = fixture_layout()
    before = dumps_layout(lay)
    with pytest.raises(E.UnknownTarget):
        E.apply_feedback(lay, "move door 1 two feet to the left, and remove wall 99")
    assert dumps_layout(lay) == before


def test_inverse_pair():
    lay = fixture_layout()
    once = E.apply_feedback(lay, "move door 1 three ft to the left").new_layout
    back = E.apply_feedback(once, "move door 1 three ft to the right").new_layout
    assert dumps_layout(back) == dumps_layout(lay)


@given(st.floats(min_value=0.1, max_value=3.0),
       st.sampled_from(["left", "right"]))
def test_inverse_property(dist, direction):
    lay = fixture_layout()
    opposite = {"left": "right", "right": "left"}[direction]
    d = round(dist, 2)
    fwd = E.apply_feedback(lay, f"move door 1 {d} feet to the {direction}")
    if fwd.warnings:  # clamped at a margin: inverse not expected
        return
    back = E.apply_feedback(fwd.new_layout,
                            f"move door 1 {d} feet to the {opposite}")
    if back.warnings:
        return
    assert dumps_layout(back.new_layout) == dumps_layout(lay)


def test_rehost_keeps_offset_when_legal():
    lay = fixture_layout()
    out = E.apply_feedback(lay, "move door 1 to wall 4")
    door = out.new_layout.opening_by_id("door1")
    assert door.host == "wall4"
    assert door.offset == 7.5


def test_rehost_clamps_to_margin():
    lay = fixture_layout()
    out = E.apply_feedback(lay, "move door 3 to wall 8")  # wall8 is 5 ft long
    door = out.new_layout.opening_by_id("door3")
    assert door.host == "wall8"
    assert door.offset == 2.75  # clamped from 16.0 to the far margin; warned
    assert out.warnings


def test_moveby_wall_rides_and_resnaps():
    lay = fixture_layout()
    out = E.apply_feedback(lay, "move wall 8 upward by 2 feet")
    w8 = out.new_layout.wall_by_id("wall8")
    assert w8.start.as_tuple() == (0.0, 8.0)
    assert w8.end.as_tuple() == (5.0, 8.0)


def test_connect_with_keep():
    lay = fixture_layout()
    # free wall4's left end near wall1 and aim its right end at wall5's top
    out = E.apply_feedback(
        lay, "connect wall 4 with the top end of wall 5, while keeping the "
             "left end of wall 4 connected to wall 1")
    w4 = out.new_layout.wall_by_id("wall4")
    moved = w4.start if w4.start.x > w4.end.x else w4.end
    kept = w4.start if moved is w4.end else w4.end
    assert moved.as_tuple() == (10.0, 10.0)
    assert kept.as_tuple() == (0.0, 10.0)


def test_connect_same_endpoint_impossible():
    lay = Layout(walls=[
        LineWall("wall1", Point2(0, 0), Point2(10, 0)),
        LineWall("wall2", Point2(0, 0), Point2(0, 10)),
    ])
    # pinning the left end at (0,0) while snapping the other end to the same
    # point would collapse the wall: both constraints on one endpoint
    with pytest.raises(E.GeometricallyImpossible):
        E.apply_feedback(
            lay, "connect wall 1 with the bottom end of wall 2, while keeping "
                 "the left end of wall 1 connected to wall 2")


def test_extend_reanchors_openings_on_start_end():
    # extending at the stored start must not move hosted openings in the world
    lay = Layout(walls=[LineWall("wall1", Point2(0, 0), Point2(0, 18))],
                 windows=[Opening("win1", "window", "wall1", 12.0, 4.5, 4.0, 3.0)])
    world_before = wall_point_at(lay.walls[0], 12.0)
    out = E.apply_feedback(lay, "extend wall 1 downward by 8 feet")
    w = out.new_layout.walls[0]
    win = out.new_layout.windows[0]
    assert w.start.as_tuple() == (0.0, -8.0)
    assert win.offset == 20.0
    assert wall_point_at(w, win.offset).dist(world_before) < 1e-9


def test_remove_wall_orphans_openings():
    lay = fixture_layout()
    out = E.apply_feedback(lay, "remove wall 2")
    assert out.new_layout.wall_by_id("wall2") is None
    assert out.new_layout.opening_by_id("door1").host == "wall2"  # orphaned
    assert any("orphaned" in w for w in out.warnings)


def test_split_and_merge_roundtrip():
    lay = fixture_layout()
    split = E.apply_feedback(lay, "split wall 2 at 12 feet").new_layout
    assert len(split.walls) == len(lay.walls) + 1
    new_wall = split.wall_by_id("wall6")
    assert new_wall is not None
    assert new_wall.start.as_tuple() == (12.0, 0.0)
    d3 = split.opening_by_id("door3")
    assert d3.host == "wall6" and d3.offset == 4.0
    merged = E.apply_feedback(split, "merge wall 2 and wall 6").new_layout
    w2 = merged.wall_by_id("wall2")
    assert w2.start.as_tuple() == (0.0, 0.0) and w2.end.as_tuple() == (20.0, 0.0)
    assert merged.opening_by_id("door3").host == "wall2"
    assert merged.opening_by_id("door3").offset == 16.0


def test_id_stability():
    lay = fixture_layout()
    ids_before = set(lay.element_ids())
    for text in ("move door 1 one ft to the left",
                 "extend wall 7 upward by 1 feet",
                 "move wall 8 upward by 1 feet",
                 "set thickness of wall 2 to 0.8 feet"):
        lay = E.apply_feedback(lay, text).new_layout
    assert set(lay.element_ids()) == ids_before


def test_rename_single():
    lay = fixture_layout()
    out = E.apply_feedback(lay, "rename door 3 to door 9").new_layout
    assert out.opening_by_id("door9") is not None
    assert out.opening_by_id("door3") is None


def test_determinism():
    lay = fixture_layout()
    text = "move door 1 two feet to the right, and extend wall 7 upward by 2 feet"
    a = E.apply_feedback(lay, text).new_layout
    b = E.apply_feedback(lay, text).new_layout
    assert dumps_layout(a) == dumps_layout(b)
