"""Compile a validated layout into an ordered build plan, execute it into a
3D model with a bounded runtime-repair loop, and emit external script text.

Plan ordering contract: all wall ops first (canonical id order), openings
grouped by host wall, exactly one floor slab op last. The slab boundary ring
is stored with an explicit closing vertex so an unclosed ring is expressible
(and repairable only within snap tolerance).
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

from . import constants as C
from . import mesh as M
from . import planar
from .evalharness import normalize_id, Unclassifiable
from .geometry import (ArcWall, Layout, LineWall, Opening, Point2, Wall,
                       layout_digest, wall_length)
from .validate import validate

OP_KINDS = ("CreateLineWall", "CreateArcWall", "PlaceDoor", "PlaceWindow",
            "CreateFloorSlab")

_REQUIRED_ATTRS = {
    "CreateLineWall": ("id", "start", "end", "thickness", "height"),
    "CreateArcWall": ("id", "center", "radius", "start_angle", "sweep", "ccw",
                      "thickness", "height"),
    "PlaceDoor": ("id", "host", "offset", "width", "height"),
    "PlaceWindow": ("id", "host", "offset", "width", "height", "sill"),
    "CreateFloorSlab": ("id", "boundary", "thickness"),
}

FAULT_CODES = ("OPENING_OUT_OF_EXTENT", "OPENING_COLLISION", "ZERO_LENGTH_CURVE",
               "SLAB_NOT_CLOSED", "HOST_MISSING")


class NotValidated(ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__("layout fails validation; compile requires a clean layout")


class NoWalls(ValueError):
    pass


class RepairExhausted(RuntimeError):
    def __init__(self, faults):
        self.faults = faults
        super().__init__(f"repair loop exhausted with {len(faults)} fault(s)")


@dataclass
class BuildOp:
    kind: str
    attrs: dict

    @property
    def source_id(self) -> str:
        return self.attrs.get("id", "")

    def to_doc(self) -> dict:
        return {"kind": self.kind, **self.attrs}


@dataclass
class BuildPlan:
    ops: list[BuildOp] = field(default_factory=list)
    provenance: str = ""

    def to_doc(self) -> dict:
        return {"ops": [op.to_doc() for op in self.ops],
                "provenance": self.provenance}

    def dumps(self) -> str:
        return json.dumps(self.to_doc(), separators=(",", ":")) + "\n"


def plan_from_doc(doc: dict) -> BuildPlan:
    ops = [BuildOp(entry["kind"], {k: v for k, v in entry.items() if k != "kind"})
           for entry in doc.get("ops", [])]
    return BuildPlan(ops, doc.get("provenance", ""))


@dataclass
class RuntimeFault:
    code: str
    op_index: int
    detail: str

    def to_doc(self) -> dict:
        return {"code": self.code, "op_index": self.op_index, "detail": self.detail}


def _id_rank(eid: str) -> tuple[int, str]:
    try:
        return (normalize_id(eid)[1], eid)
    except Unclassifiable:
        return (1 << 30, eid)


def _round2(x: float) -> float:
    v = round(float(x), 2)
    return 0.0 if v == 0.0 else v


def compile(layout: Layout) -> BuildPlan:
    """Layout to ordered build IR: walls, openings grouped by host, slab."""
    report = validate(layout)
    if not report.passes:
        raise NotValidated(report)
    if not layout.walls:
        raise NoWalls("layout has no walls")

    plan = BuildPlan(provenance=layout_digest(layout))
    walls = sorted(layout.walls, key=lambda w: _id_rank(w.id))
    for w in walls:
        if isinstance(w, LineWall):
            plan.ops.append(BuildOp("CreateLineWall", {
                "id": w.id, "start": [w.start.x, w.start.y],
                "end": [w.end.x, w.end.y],
                "thickness": w.thickness, "height": w.height}))
        else:
            plan.ops.append(BuildOp("CreateArcWall", {
                "id": w.id, "center": [w.center.x, w.center.y],
                "radius": w.radius, "start_angle": w.start_angle,
                "sweep": w.sweep, "ccw": w.ccw,
                "thickness": w.thickness, "height": w.height}))
    for w in walls:
        hosted = sorted((o for o in layout.openings() if o.host == w.id),
                        key=lambda o: (o.offset, o.id))
        for o in hosted:
            if o.cls == "door":
                plan.ops.append(BuildOp("PlaceDoor", {
                    "id": o.id, "host": o.host, "offset": o.offset,
                    "width": o.width, "height": o.height}))
            else:
                plan.ops.append(BuildOp("PlaceWindow", {
                    "id": o.id, "host": o.host, "offset": o.offset,
                    "width": o.width, "height": o.height,
                    "sill": o.sill if o.sill is not None else C.DEFAULT_WINDOW_SILL}))
    boundary = planar.outer_boundary_polygon(layout.walls)
    ring = [[p.x, p.y] for p in boundary]
    ring.append(list(ring[0]))  # explicit closure
    plan.ops.append(BuildOp("CreateFloorSlab", {
        "id": "slab1", "boundary": ring, "thickness": C.SLAB_THICKNESS}))
    return plan


def static_validate(plan: BuildPlan) -> tuple[bool, list[dict]]:
    """IR-level checks: declared op schemas, well-formed values, resolvable
    bindings, dependency-consistent order."""
    problems: list[dict] = []

    def bad(check: str, idx: int, msg: str):
        problems.append({"check": check, "op_index": idx, "message": msg})

    for i, op in enumerate(plan.ops):
        if op.kind not in OP_KINDS:
            bad("imports", i, f"unknown op kind {op.kind!r}")
            continue
        missing = [k for k in _REQUIRED_ATTRS[op.kind] if k not in op.attrs]
        if missing:
            bad("imports", i, f"{op.kind} missing attributes: {missing}")

    ids_seen: set[str] = set()
    wall_ids: set[str] = set()
    for i, op in enumerate(plan.ops):
        if op.kind not in OP_KINDS or any(k not in op.attrs
                                          for k in _REQUIRED_ATTRS.get(op.kind, ())):
            continue
        a = op.attrs
        if op.kind == "CreateLineWall":
            ok = (len(a["start"]) == 2 and len(a["end"]) == 2
                  and a["thickness"] > 0 and a["height"] > 0)
        elif op.kind == "CreateArcWall":
            ok = (a["radius"] > 0 and 0 < a["sweep"] < 2 * math.pi
                  and a["thickness"] > 0 and a["height"] > 0)
        elif op.kind in ("PlaceDoor", "PlaceWindow"):
            ok = a["width"] > 0 and a["height"] > 0
        else:
            ok = isinstance(a["boundary"], list) and len(a["boundary"]) >= 4
        if not ok:
            bad("syntax", i, f"{op.kind} has malformed values")
        if a["id"] in ids_seen:
            bad("api_bindings", i, f"duplicate op id {a['id']!r}")
        ids_seen.add(a["id"])
        if op.kind in ("CreateLineWall", "CreateArcWall"):
            wall_ids.add(a["id"])
        if op.kind in ("PlaceDoor", "PlaceWindow"):
            if a["host"] not in wall_ids:
                bad("api_bindings" if a["host"] not in
                    {o.attrs.get("id") for o in plan.ops
                     if o.kind in ("CreateLineWall", "CreateArcWall")}
                    else "dependency_order", i,
                    f"{a['id']}: host {a['host']!r} not created earlier")

    slab_indices = [i for i, op in enumerate(plan.ops)
                    if op.kind == "CreateFloorSlab"]
    if len(slab_indices) != 1:
        bad("dependency_order", len(plan.ops) - 1,
            f"expected exactly one CreateFloorSlab, found {len(slab_indices)}")
    elif slab_indices[0] != len(plan.ops) - 1:
        bad("dependency_order", slab_indices[0], "slab op must be last")
    return (not problems, problems)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _wall_from_op(op: BuildOp) -> Wall:
    a = op.attrs
    if op.kind == "CreateLineWall":
        return LineWall(a["id"], Point2(*a["start"]), Point2(*a["end"]),
                        a["thickness"], a["height"])
    return ArcWall(a["id"], Point2(*a["center"]), a["radius"], a["start_angle"],
                   a["sweep"], a["ccw"], a["thickness"], a["height"])


def _opening_from_op(op: BuildOp) -> Opening:
    a = op.attrs
    cls = "door" if op.kind == "PlaceDoor" else "window"
    return Opening(a["id"], cls, a["host"], a["offset"], a["width"], a["height"],
                   a.get("sill"))


def execute(plan: BuildPlan) -> M.Model3D | list[RuntimeFault]:
    """Build the model, or return every runtime fault (never a partial model)."""
    faults: list[RuntimeFault] = []
    walls: dict[str, Wall] = {}
    openings: list[tuple[int, Opening]] = []
    slab_ring: list[Point2] | None = None
    slab_idx = -1

    for i, op in enumerate(plan.ops):
        if op.kind in ("CreateLineWall", "CreateArcWall"):
            w = _wall_from_op(op)
            if wall_length(w) <= 1e-9:
                faults.append(RuntimeFault("ZERO_LENGTH_CURVE", i,
                                           f"{w.id}: zero length"))
            else:
                walls[w.id] = w
        elif op.kind in ("PlaceDoor", "PlaceWindow"):
            openings.append((i, _opening_from_op(op)))
        elif op.kind == "CreateFloorSlab":
            slab_ring = [Point2(*p) for p in op.attrs["boundary"]]
            slab_idx = i

    per_host: dict[str, list[tuple[int, Opening]]] = {}
    for i, o in openings:
        host = walls.get(o.host)
        if host is None:
            faults.append(RuntimeFault("HOST_MISSING", i,
                                       f"{o.id}: host {o.host!r} missing"))
            continue
        length = wall_length(host)
        lo, hi = o.offset - o.width / 2.0, o.offset + o.width / 2.0
        if lo < C.OPENING_END_MARGIN - 1e-6 or hi > length - C.OPENING_END_MARGIN + 1e-6:
            faults.append(RuntimeFault("OPENING_OUT_OF_EXTENT", i,
                                       f"{o.id}: span [{lo:.2f},{hi:.2f}] outside "
                                       f"margins of {o.host} (len {length:.2f})"))
            continue
        per_host.setdefault(o.host, []).append((i, o))

    for host_id, members in sorted(per_host.items()):
        members.sort(key=lambda t: t[1].offset)
        for (ia, a), (ib, b) in zip(members, members[1:]):
            gap = (b.offset - b.width / 2.0) - (a.offset + a.width / 2.0)
            if gap < C.OPENING_SPACING - 1e-6:
                faults.append(RuntimeFault("OPENING_COLLISION", ib,
                                           f"{b.id}: {gap:.2f} ft gap to {a.id} "
                                           f"on {host_id}"))

    if slab_ring is not None:
        if len(slab_ring) < 4 or slab_ring[0].dist(slab_ring[-1]) > C.CONNECT_TOL:
            gap = slab_ring[0].dist(slab_ring[-1]) if len(slab_ring) >= 2 else 0.0
            faults.append(RuntimeFault("SLAB_NOT_CLOSED", slab_idx,
                                       f"slab ring gap {gap:.2f} ft"))

    if faults:
        return faults

    model = M.Model3D()
    for wid in sorted(walls, key=_id_rank):
        hosted = [o for _, o in per_host.get(wid, [])]
        model.elements.append(M.ModelElement(wid, "wall",
                                             M.wall_mesh(walls[wid], hosted)))
    for host_id, members in sorted(per_host.items()):
        for _, o in members:
            model.elements.append(M.ModelElement(
                o.id, o.cls, M.panel_mesh(walls[host_id], o)))
    if slab_ring is not None:
        poly = slab_ring[:-1]  # drop closing vertex for the polygon form
        model.slab_polygon = poly
        model.elements.append(M.ModelElement("slab1", "slab", M.slab_mesh(poly)))
    return model


# ---------------------------------------------------------------------------
# Repair loop
# ---------------------------------------------------------------------------

def repair(plan: BuildPlan, faults: list[RuntimeFault],
           layout: Layout | None = None) -> BuildPlan:
    """Targeted deterministic fixes for runtime faults."""
    fixed = BuildPlan(copy.deepcopy(plan.ops), plan.provenance)
    walls = {op.attrs["id"]: _wall_from_op(op) for op in fixed.ops
             if op.kind in ("CreateLineWall", "CreateArcWall")}
    for fault in faults:
        if fault.code == "OPENING_OUT_OF_EXTENT":
            op = fixed.ops[fault.op_index]
            host = walls.get(op.attrs["host"])
            if host is None:
                continue
            length = wall_length(host)
            lo = C.OPENING_END_MARGIN + op.attrs["width"] / 2.0
            hi = length - C.OPENING_END_MARGIN - op.attrs["width"] / 2.0
            if lo <= hi:
                op.attrs["offset"] = round(min(max(op.attrs["offset"], lo), hi), 2)
        elif fault.code == "OPENING_COLLISION":
            op = fixed.ops[fault.op_index]
            host = walls.get(op.attrs["host"])
            if host is None:
                continue
            length = wall_length(host)
            # shift the later opening away until the gap reaches the minimum
            earlier = [o for o in fixed.ops
                       if o.kind in ("PlaceDoor", "PlaceWindow")
                       and o.attrs["host"] == op.attrs["host"] and o is not op]
            for other in earlier:
                gap = ((op.attrs["offset"] - op.attrs["width"] / 2.0)
                       - (other.attrs["offset"] + other.attrs["width"] / 2.0))
                if -op.attrs["width"] - other.attrs["width"] < gap < C.OPENING_SPACING:
                    need = (other.attrs["offset"] + other.attrs["width"] / 2.0
                            + C.OPENING_SPACING + op.attrs["width"] / 2.0)
                    hi = length - C.OPENING_END_MARGIN - op.attrs["width"] / 2.0
                    op.attrs["offset"] = round(min(need, hi), 2)
                    if need > hi:
                        # clamped: make room by pushing the earlier one back
                        lo_other = C.OPENING_END_MARGIN + other.attrs["width"] / 2.0
                        want = (op.attrs["offset"] - op.attrs["width"] / 2.0
                                - C.OPENING_SPACING - other.attrs["width"] / 2.0)
                        other.attrs["offset"] = round(max(want, lo_other), 2)
        elif fault.code == "ZERO_LENGTH_CURVE":
            if 0 <= fault.op_index < len(fixed.ops):
                fixed.ops[fault.op_index] = None  # drop; compacted below
        elif fault.code == "SLAB_NOT_CLOSED":
            op = fixed.ops[fault.op_index]
            ring = op.attrs["boundary"]
            if len(ring) >= 2:
                gap = math.hypot(ring[0][0] - ring[-1][0], ring[0][1] - ring[-1][1])
                if 0 < gap <= C.CONNECT_TOL:
                    ring[-1] = list(ring[0])
        elif fault.code == "HOST_MISSING" and layout is not None:
            op = fixed.ops[fault.op_index]
            want = op.attrs["host"]
            src = layout.wall_by_id(want)
            if src is not None and want not in walls:
                if isinstance(src, LineWall):
                    new_op = BuildOp("CreateLineWall", {
                        "id": src.id, "start": [src.start.x, src.start.y],
                        "end": [src.end.x, src.end.y],
                        "thickness": src.thickness, "height": src.height})
                else:
                    new_op = BuildOp("CreateArcWall", {
                        "id": src.id, "center": [src.center.x, src.center.y],
                        "radius": src.radius, "start_angle": src.start_angle,
                        "sweep": src.sweep, "ccw": src.ccw,
                        "thickness": src.thickness, "height": src.height})
                fixed.ops.insert(0, new_op)
                walls[src.id] = src
    fixed.ops = [op for op in fixed.ops if op is not None]
    return fixed


def execute_with_repair(plan: BuildPlan, layout: Layout | None = None,
                        max_iters: int = C.REPAIR_MAX_ITERS
                        ) -> tuple[M.Model3D, BuildPlan, int]:
    """execute -> repair loop, bounded; raises RepairExhausted."""
    current = plan
    for iteration in range(max_iters + 1):
        result = execute(current)
        if isinstance(result, M.Model3D):
            return result, current, iteration
        if iteration == max_iters:
            raise RepairExhausted(result)
        current = repair(current, result, layout)
    raise RepairExhausted([])  # unreachable


# ---------------------------------------------------------------------------
# Script emission
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, float):
        return repr(round(v, 6))
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return repr(v)


def emit_script_text(plan: BuildPlan) -> str:
    """Deterministic script for the external BIM scripting environment.

    Template: one `bim.<verb>(...)` call per op, in plan order, wrapped in
    begin/finish. Same plan produces byte-identical text.
    """
    ok, problems = static_validate(plan)
    if not ok:
        raise ValueError(f"plan fails static validation: {problems}")
    lines = [
        "# auto-generated build script -- units: feet, angles: radians",
        f"# provenance: {plan.provenance}",
        "",
        "bim.begin_model()",
    ]
    call_of = {"CreateLineWall": "create_line_wall",
               "CreateArcWall": "create_arc_wall",
               "PlaceDoor": "place_door",
               "PlaceWindow": "place_window",
               "CreateFloorSlab": "create_floor_slab"}
    for op in plan.ops:
        args = ", ".join(f"{k}={_fmt(op.attrs[k])}" for k in _REQUIRED_ATTRS[op.kind])
        lines.append(f"bim.{call_of[op.kind]}({args})")
    lines.append("bim.finish_model()")
    lines.append("")
    return "\n".join(lines)
