import math

import pytest

from planforge import buildplan as B
from planforge import mesh as M
from planforge import planar
from planforge.geometry import (ArcWall, Layout, LineWall, Opening, Point2,
                                Room, dumps_layout)


def square_layout(with_door=True) -> Layout:
    walls = [
        LineWall("wall1", Point2(0, 10), Point2(0, 0)),
        LineWall("wall2", Point2(0, 0), Point2(10, 0)),
        LineWall("wall3", Point2(10, 0), Point2(10, 10)),
        LineWall("wall4", Point2(10, 10), Point2(0, 10)),
    ]
    doors = [Opening("door1", "door", "wall2", 5.0, 3.0, 7.0)] if with_door else []
    rooms = [Room("room1",
                  [Point2(0, 0), Point2(10, 0), Point2(10, 10), Point2(0, 10)],
                  ["wall2", "wall3", "wall4", "wall1"])]
    return Layout(walls=walls, doors=doors, rooms=rooms)


# ---------------------------------------------------------------------------
# Meshes
# ---------------------------------------------------------------------------

def test_plain_wall_box_mesh():
    mesh = M.wall_mesh(LineWall("w", Point2(0, 0), Point2(8, 0)), [])
    assert len(mesh.vertices) == 8
    assert len(mesh.triangles) == 12
    assert M.is_watertight(mesh)
    assert M.euler_characteristic(mesh) == 2  # genus 0


def test_door_notch_watertight_genus0():
    wall = LineWall("w", Point2(0, 0), Point2(12, 0))
    door = Opening("d", "door", "w", 6.0, 3.0, 7.0)
    mesh = M.wall_mesh(wall, [door])
    assert M.is_watertight(mesh)
    assert M.euler_characteristic(mesh) == 2  # notch opens at the floor


def test_window_hole_watertight_genus1():
    wall = LineWall("w", Point2(0, 0), Point2(12, 0))
    win = Opening("win", "window", "w", 6.0, 4.0, 4.0, 3.0)
    mesh = M.wall_mesh(wall, [win])
    assert M.is_watertight(mesh)
    assert M.euler_characteristic(mesh) == 0  # torus-like: genus 1


def test_arc_wall_mesh_watertight():
    arc = ArcWall("a", Point2(0, 0), 10.0, 0.0, math.pi / 2, True)
    win = Opening("win", "window", "a", 7.85, 4.0, 4.0, 3.0)
    mesh = M.wall_mesh(arc, [win])
    assert M.is_watertight(mesh)
    assert M.euler_characteristic(mesh) == 0


def test_slab_mesh_watertight():
    poly = [Point2(0, 0), Point2(10, 0), Point2(10, 6), Point2(4, 6),
            Point2(4, 10), Point2(0, 10)]  # L-shape exercises ear clipping
    mesh = M.slab_mesh(poly)
    assert M.is_watertight(mesh)
    assert M.euler_characteristic(mesh) == 2


def test_panel_mesh_watertight():
    wall = LineWall("w", Point2(0, 0), Point2(12, 0))
    door = Opening("d", "door", "w", 6.0, 3.0, 7.0)
    mesh = M.panel_mesh(wall, door)
    assert M.is_watertight(mesh)
    assert len(mesh.vertices) == 8


# ---------------------------------------------------------------------------
# Compile
# ---------------------------------------------------------------------------

def test_compile_ordering_and_counts():
    plan = B.compile(square_layout())
    kinds = [op.kind for op in plan.ops]
    assert kinds == ["CreateLineWall"] * 4 + ["PlaceDoor", "CreateFloorSlab"]
    assert plan.provenance
    ring = plan.ops[-1].attrs["boundary"]
    assert ring[0] == ring[-1]  # explicit closure


def test_compile_requires_validation():
    lay = square_layout()
    lay.walls[1] = LineWall("wall2", Point2(0.4, 0), Point2(10, 0))  # dangling
    with pytest.raises(B.NotValidated):
        B.compile(lay)


def test_compile_no_walls():
    with pytest.raises(B.NoWalls):
        B.compile(Layout())


# ---------------------------------------------------------------------------
# Static validation
# ---------------------------------------------------------------------------

def test_static_validate_pass():
    ok, problems = B.static_validate(B.compile(square_layout()))
    assert ok and not problems


def test_static_validate_dependency_order():
    plan = B.compile(square_layout())
    door = next(op for op in plan.ops if op.kind == "PlaceDoor")
    plan.ops.remove(door)
    plan.ops.insert(0, door)
    ok, problems = B.static_validate(plan)
    assert not ok
    assert any(p["check"] == "dependency_order" for p in problems)


def test_static_validate_binding():
    plan = B.compile(square_layout())
    next(op for op in plan.ops if op.kind == "PlaceDoor").attrs["host"] = "wall99"
    ok, problems = B.static_validate(plan)
    assert not ok
    assert any(p["check"] == "api_bindings" for p in problems)


# ---------------------------------------------------------------------------
# Execute + repair
# ---------------------------------------------------------------------------

def test_execute_square_with_door():
    model, plan, iters = B.execute_with_repair(B.compile(square_layout()))
    assert iters == 0
    assert model.count("wall") == 4
    assert model.count("door") == 1
    assert model.count("slab") == 1
    assert len(model.elements) == 6
    for el in model.elements:
        assert M.is_watertight(el.mesh), el.source_id


def test_execute_fault_out_of_extent():
    plan = B.compile(square_layout())
    next(op for op in plan.ops if op.kind == "PlaceDoor").attrs["offset"] = 9.5
    result = B.execute(plan)
    assert isinstance(result, list)
    assert result[0].code == "OPENING_OUT_OF_EXTENT"
    model, fixed, iters = B.execute_with_repair(plan)
    assert iters == 1
    assert next(op for op in fixed.ops
                if op.kind == "PlaceDoor").attrs["offset"] == 7.75


def test_execute_fault_slab_gap():
    plan = B.compile(square_layout())
    plan.ops[-1].attrs["boundary"][-1] = [0.3, 0.0]  # 0.3 ft gap: unrepairable
    result = B.execute(plan)
    assert isinstance(result, list)
    assert result[0].code == "SLAB_NOT_CLOSED"
    with pytest.raises(B.RepairExhausted):
        B.execute_with_repair(plan)


def test_execute_fault_collision_repaired():
    lay = square_layout()
    lay.doors.append(Opening("door2", "door", "wall2", 5.2, 3.0, 7.0))
    # compile would reject: build the plan by hand from the valid layout
    plan = B.compile(square_layout())
    door2 = B.BuildOp("PlaceDoor", {"id": "door2", "host": "wall2",
                                    "offset": 5.2, "width": 3.0, "height": 7.0})
    plan.ops.insert(-1, door2)
    result = B.execute(plan)
    assert isinstance(result, list)
    assert any(f.code == "OPENING_COLLISION" for f in result)
    model, fixed, iters = B.execute_with_repair(plan)
    assert 1 <= iters <= 5
    assert model.count("door") == 2


def test_execute_fault_host_missing_regenerated():
    lay = square_layout()
    plan = B.compile(lay)
    plan.ops = [op for op in plan.ops
                if not (op.kind == "CreateLineWall" and op.attrs["id"] == "wall2")]
    result = B.execute(plan)
    assert isinstance(result, list)
    assert any(f.code == "HOST_MISSING" for f in result)
    model, fixed, iters = B.execute_with_repair(plan, layout=lay)
    assert model.count("wall") == 4


def test_zero_length_dropped_with_warning_fault():
    plan = B.compile(square_layout())
    plan.ops.insert(0, B.BuildOp("CreateLineWall", {
        "id": "wall9", "start": [1, 1], "end": [1, 1],
        "thickness": 0.5, "height": 10.0}))
    result = B.execute(plan)
    assert isinstance(result, list)
    assert result[0].code == "ZERO_LENGTH_CURVE"
    model, fixed, iters = B.execute_with_repair(plan)
    assert model.count("wall") == 4  # degenerate op dropped


def test_slab_contains_rooms():
    lay = square_layout()
    model, _, _ = B.execute_with_repair(B.compile(lay))
    for room in lay.rooms:
        for p in room.polygon:
            assert planar.point_in_polygon(p, model.slab_polygon, eps=1e-6)


# ---------------------------------------------------------------------------
# Script + OBJ emission
# ---------------------------------------------------------------------------

def test_emit_script_deterministic():
    lay = square_layout()
    t1 = B.emit_script_text(B.compile(lay))
    t2 = B.emit_script_text(B.compile(lay))
    assert t1 == t2
    assert t1.count("bim.create_line_wall(") == 4
    assert "bim.place_door(" in t1
    assert t1.strip().endswith("bim.finish_model()")


def test_export_obj_counts():
    wall_only = Layout(walls=[LineWall("wall1", Point2(0, 0), Point2(8, 0))])
    mesh = M.wall_mesh(wall_only.walls[0], [])
    model = M.Model3D(elements=[M.ModelElement("wall1", "wall", mesh)])
    data = M.export_obj(model).decode()
    assert data.startswith("# units: feet")
    assert data.count("\nv ") == 8
    assert data.count("\nf ") == 12
    assert "o wall1" in data


def test_export_obj_empty():
    data = M.export_obj(M.Model3D()).decode()
    assert data == "# units: feet\n"
