"""Validator soundness: one injector per violation code, plus repair behavior."""

import math

import pytest

from planforge import validate as V
from planforge.geometry import (ArcWall, Layout, LineWall, Opening, Point2,
                                Room, layout_from_doc)


def valid_square() -> Layout:
    walls = [
        LineWall("wall1", Point2(0, 10), Point2(0, 0)),
        LineWall("wall2", Point2(0, 0), Point2(10, 0)),
        LineWall("wall3", Point2(10, 0), Point2(10, 10)),
        LineWall("wall4", Point2(10, 10), Point2(0, 10)),
    ]
    doors = [Opening("door1", "door", "wall2", 5.0, 3.0, 7.0)]
    windows = [Opening("win1", "window", "wall4", 5.0, 4.5, 4.0, 3.0)]
    rooms = [Room("room1",
                  [Point2(0, 0), Point2(10, 0), Point2(10, 10), Point2(0, 10)],
                  ["wall2", "wall3", "wall4", "wall1"])]
    return Layout(walls=walls, doors=doors, windows=windows, rooms=rooms)


def test_valid_layout_passes():
    report = V.validate(valid_square())
    assert report.passes
    assert report.violations == []


# ---------------------------------------------------------------------------
# Injectors: each produces exactly its target defect
# ---------------------------------------------------------------------------

def inject_SCHEMA(lay):
    lay.rooms[0].wall_chain.append("wall99")
    return lay

def inject_DUP_ID(lay):
    # two walls both named wall3; references retargeted so only DUP_ID fires
    lay.walls[3].id = "wall3"
    lay.windows[0].host = "wall3"
    lay.rooms[0].wall_chain = ["wall2", "wall3", "wall3", "wall1"]
    return lay

def inject_ZERO_LEN(lay):
    lay.walls.append(LineWall("wall5", Point2(1, 1), Point2(1, 1)))
    return lay

def inject_FULL_CIRCLE(lay):
    lay.walls.append(ArcWall("wall5", Point2(5, 5), 2.0, 0.0, 2 * math.pi, True))
    return lay

def inject_COLLINEAR_ARC3PT(lay):
    doc = {"units": "feet",
           "walls": [{"id": "wall9", "kind": "arc3pt", "p_start": [0, 0],
                      "p_mid": [5, 0.001], "p_end": [10, 0]}],
           "doors": [], "windows": [], "rooms": []}
    extra = layout_from_doc(doc)
    lay.walls.extend(extra.walls)
    lay.ingest_notes.extend(extra.ingest_notes)
    return lay

def inject_OPENING_OFF_WALL(lay):
    lay.doors[0].offset = 10.3  # anchor beyond the wall end
    return lay

def inject_OPENING_END_MARGIN(lay):
    lay.doors[0].offset = 1.6  # inside the wall but margin < 0.75
    return lay

def inject_OPENING_OVERLAP(lay):
    lay.doors.append(Opening("door2", "door", "wall2", 5.2, 3.0, 7.0))
    return lay

def inject_OPENING_CROSSES_VERTEX(lay):
    # a wall crossing the room puts a junction at (3,0) inside door1's span
    lay.walls.append(LineWall("wall5", Point2(3, 0), Point2(3, 10)))
    lay.doors[0].offset = 4.0
    lay.windows[0].offset = 3.5  # keep win1 clear of the junction on wall4
    return lay

def inject_MISSING_HOST(lay):
    lay.doors[0].host = "wall99"
    return lay

def inject_ROOM_NOT_CLOSED(lay):
    lay.rooms[0].polygon.append(Point2(0.02, 0.01))  # nearly repeats first
    return lay

def inject_ROOM_CW(lay):
    lay.rooms[0].polygon.reverse()
    return lay

def inject_ROOM_SELF_X(lay):
    # self-crossing ring with positive net area (avoids NONPOS_AREA)
    lay.rooms[0].polygon = [Point2(0, 0), Point2(10, 0), Point2(2, 8), Point2(8, 8)]
    return lay

def inject_ROOM_NONPOS_AREA(lay):
    lay.rooms[0].polygon = [Point2(0, 0), Point2(5, 0), Point2(10, 0)]
    return lay

def inject_DANGLING_ENDPOINT(lay):
    lay.walls[1] = LineWall("wall2", Point2(0.3, 0), Point2(10, 0))  # corner gapped
    lay.doors[0].offset = 5.3
    return lay

def inject_EXCESS_PRECISION(lay):
    # sub-tolerance imprecision: connectivity intact, precision violated
    lay.walls[1] = LineWall("wall2", Point2(0, 0), Point2(10.00123456, 0))
    return lay


INJECTORS = {
    "SCHEMA": inject_SCHEMA,
    "DUP_ID": inject_DUP_ID,
    "ZERO_LEN": inject_ZERO_LEN,
    "FULL_CIRCLE": inject_FULL_CIRCLE,
    "COLLINEAR_ARC3PT": inject_COLLINEAR_ARC3PT,
    "OPENING_OFF_WALL": inject_OPENING_OFF_WALL,
    "OPENING_END_MARGIN": inject_OPENING_END_MARGIN,
    "OPENING_OVERLAP": inject_OPENING_OVERLAP,
    "OPENING_CROSSES_VERTEX": inject_OPENING_CROSSES_VERTEX,
    "MISSING_HOST": inject_MISSING_HOST,
    "ROOM_NOT_CLOSED": inject_ROOM_NOT_CLOSED,
    "ROOM_CW": inject_ROOM_CW,
    "ROOM_SELF_X": inject_ROOM_SELF_X,
    "ROOM_NONPOS_AREA": inject_ROOM_NONPOS_AREA,
    "DANGLING_ENDPOINT": inject_DANGLING_ENDPOINT,
    "EXCESS_PRECISION": inject_EXCESS_PRECISION,
}

# defects whose injection logically entails extra codes
ENTAILED = {
    "ZERO_LEN": {"DANGLING_ENDPOINT"},
    "FULL_CIRCLE": {"DANGLING_ENDPOINT"},
    "COLLINEAR_ARC3PT": {"DANGLING_ENDPOINT", "EXCESS_PRECISION"},
    "OPENING_CROSSES_VERTEX": set(),
    "DANGLING_ENDPOINT": set(),
}


@pytest.mark.parametrize("code", sorted(INJECTORS))
def test_injector_detected(code):
    lay = INJECTORS[code](valid_square())
    report = V.validate(lay)
    assert not report.passes
    got = report.codes()
    assert code in got, f"{code} not detected; got {got}"
    extras = got - {code} - ENTAILED.get(code, set())
    assert not extras, f"{code}: unexpected extra codes {extras}"


def test_all_16_codes_covered():
    assert set(INJECTORS) == set(V.CODES)


def test_validate_is_pure():
    lay = inject_DUP_ID(inject_OPENING_END_MARGIN(valid_square()))
    r1 = V.validate(lay)
    r2 = V.validate(lay)
    assert [v.to_doc() for v in r1.violations] == [v.to_doc() for v in r2.violations]


def test_end_margin_suggested_fix():
    lay = valid_square()
    lay.doors[0] = Opening("door1", "door", "wall2", 0.6, 2.7, 7.0)
    report = V.validate(lay)
    viol = [v for v in report.violations if v.code == "OPENING_END_MARGIN"]
    assert viol and viol[0].suggested_fix["offset"] == 2.1


# ---------------------------------------------------------------------------
# Auto repair
# ---------------------------------------------------------------------------

def test_repair_off_wall_realigns():
    lay = inject_OPENING_OFF_WALL(valid_square())
    report = V.validate(lay)
    fixed = V.auto_repair(lay, report)
    after = V.validate(fixed)
    assert "OPENING_OFF_WALL" not in after.codes()
    assert after.passes


def test_repair_near_collinear_arc_to_line():
    lay = inject_COLLINEAR_ARC3PT(valid_square())
    report = V.validate(lay)
    fixed = V.auto_repair(lay, report)
    after = V.validate(fixed)
    assert "COLLINEAR_ARC3PT" not in after.codes()
    assert isinstance(fixed.wall_by_id("wall9"), LineWall)


def test_repair_rounds_precision():
    lay = inject_EXCESS_PRECISION(valid_square())
    fixed = V.auto_repair(lay, V.validate(lay))
    after = V.validate(fixed)
    assert "EXCESS_PRECISION" not in after.codes()
    assert fixed.wall_by_id("wall2").end.x == 10.0


def test_repair_overlap_separates():
    lay = inject_OPENING_OVERLAP(valid_square())
    fixed = V.auto_repair(lay, V.validate(lay))
    after = V.validate(fixed)
    assert "OPENING_OVERLAP" not in after.codes()
    doors = sorted(fixed.doors, key=lambda o: o.offset)
    assert len(doors) == 2  # separated, not merged (they fit)
    gap = (doors[1].offset - doors[1].width / 2) - (doors[0].offset + doors[0].width / 2)
    assert gap >= 0.5 - 1e-9


def test_repair_overlap_merges_when_no_room():
    lay = valid_square()
    lay.walls.append(LineWall("wall9", Point2(0, 4), Point2(7, 4)))
    lay.doors = [Opening("door1", "door", "wall9", 3.0, 3.0, 7.0),
                 Opening("door2", "door", "wall9", 4.0, 3.0, 7.0)]
    fixed = V.auto_repair(lay, V.validate(lay))
    after = V.validate(fixed)
    assert "OPENING_OVERLAP" not in after.codes()
    assert len(fixed.doors) == 1


def test_repair_never_introduces_new_codes():
    for code, inject in INJECTORS.items():
        lay = inject(valid_square())
        report = V.validate(lay)
        fixed = V.auto_repair(lay, report)
        after = V.validate(fixed)
        new = after.codes() - report.codes()
        assert not new, f"{code}: repair introduced {new}"


def test_repair_missing_host_reattaches():
    lay = inject_MISSING_HOST(valid_square())
    fixed = V.auto_repair(lay, V.validate(lay))
    after = V.validate(fixed)
    assert "MISSING_HOST" not in after.codes()
    assert fixed.doors[0].host in {w.id for w in fixed.walls}


def test_connectivity_check():
    lay = valid_square()
    assert V.connectivity_check(lay) == []
    gapped = inject_DANGLING_ENDPOINT(valid_square())
    dangles = V.connectivity_check(gapped)
    assert len(dangles) == 2  # both sides of the opened corner
    # T-junction endpoint on another wall's interior counts as connected;
    # the free end of the stub still dangles
    lay2 = valid_square()
    lay2.walls.append(LineWall("wall5", Point2(5, 0), Point2(5, 4)))
    dangles2 = {(wid, which) for wid, which, _ in V.connectivity_check(lay2)}
    assert ("wall5", "start") not in dangles2
    assert ("wall5", "end") in dangles2
