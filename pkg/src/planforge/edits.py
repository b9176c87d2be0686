"""Controlled-natural-language feedback: parse into commands, apply deterministically.

Grammar (case-insensitive; numbers as digits or words one..twenty):
    move <elem> to wall <m>
    move <elem> <n> (feet|ft) to the <dir>
    move <elem> <dirword> by <n> (feet|ft)
    extend|shorten <elem> [and <elem>]... <dirword> by <n> (feet|ft)
    remove <elem>
    add [a] (door|window) to wall <m> [at <n> (feet|ft)]
    connect wall <a> with the <end> end of wall <b>
        [, while keeping the <end> end of [wall] <a> connected to wall <c>]
    set thickness of wall <n> to <n> (feet|ft)
    split wall <n> at <n> (feet|ft)
    merge wall <n> and wall <m>
    rename <elem> to <elem2>
    renumber [ids]
    accept | reject

Directions are world-frame: up = +y (north). Batches are atomic: the first
failing clause aborts and the layout is returned unchanged. Element ids are
stable across all verbs except RenameId/Remove/Add; "renumber" runs the full
canonical relabeling.
"""

from __future__ import annotations

import copy
import difflib
import math
import re
from dataclasses import dataclass, field

from . import constants as C
from .geometry import (ArcWall, Layout, LineWall, Opening, Point2, Wall,
                       assign_canonical_ids, wall_length, wall_point_at,
                       wall_tangent_at)


class EditError(ValueError):
    pass


class UnparsableClause(EditError):
    def __init__(self, clause: str, suggestion: str | None = None):
        self.clause = clause
        self.suggestion = suggestion
        msg = f"cannot parse: {clause!r}"
        if suggestion:
            msg += f" (did you mean something like: {suggestion!r}?)"
        super().__init__(msg)


class UnknownTarget(EditError):
    pass


class GeometricallyImpossible(EditError):
    pass


@dataclass
class EditCommand:
    verb: str                      # MoveTo, MoveBy, Extend, Shorten, Remove, Add,
                                   # Connect, SetThickness, Split, Merge, ReHost,
                                   # RenameId, Accept, Reject
    target: tuple[str, int] | None = None   # (class, index)
    params: dict = field(default_factory=dict)

    def describe(self) -> str:
        t = f"{self.target[0]} {self.target[1]}" if self.target else ""
        extras = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return " ".join(x for x in (self.verb, t, extras) if x)


@dataclass
class FeedbackOutcome:
    new_layout: Layout
    applied: list[EditCommand]
    warnings: list[str]


_WORD_NUMBERS = {w: i for i, w in enumerate(
    ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
     "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
     "sixteen", "seventeen", "eighteen", "nineteen", "twenty"])}

_NUM = r"(\d+(?:\.\d+)?|" + "|".join(_WORD_NUMBERS) + r")"
_CLS = r"(wall|door|window|win)"
_DIR = r"(left|right|up|down|upward|upwards|downward|downwards|leftward|leftwards|rightward|rightwards)"
_END = r"(top|bottom|left|right)"
_FT = r"(?:feet|ft|foot)"

_TEMPLATES = [
    "move door 3 to wall 8",
    "move door 1 eight feet to the right",
    "move wall 2 downward by 8 feet",
    "extend wall 7 downward by 8 feet",
    "shorten wall 2 upward by 2 feet",
    "remove wall 5",
    "add a door to wall 3 at 6 feet",
    "connect wall 4 with the top end of wall 3, while keeping the left end of "
    "wall 4 connected to wall 5",
    "set thickness of wall 2 to 0.5 feet",
    "split wall 2 at 10 feet",
    "merge wall 2 and wall 3",
    "rename door 2 to door 5",
    "renumber ids",
    "accept",
    "reject",
]

_VERB_WORDS = ("move", "extend", "shorten", "remove", "delete", "add", "connect",
               "set", "split", "merge", "rename", "renumber", "accept", "reject")


def _number(tok: str) -> float:
    tok = tok.lower()
    if tok in _WORD_NUMBERS:
        return float(_WORD_NUMBERS[tok])
    return float(tok)


def _cls_name(tok: str) -> str:
    tok = tok.lower()
    return {"win": "window"}.get(tok, tok)


def _direction(tok: str) -> str:
    tok = tok.lower().rstrip("s")
    return {"upward": "up", "downward": "down",
            "leftward": "left", "rightward": "right"}.get(tok, tok)


_DIR_VECTORS = {"up": (0.0, 1.0), "down": (0.0, -1.0),
                "left": (-1.0, 0.0), "right": (1.0, 0.0)}


def split_clauses(text: str) -> list[str]:
    """Sentences split on commas and 'and', keeping 'while keeping ...' and
    multi-target 'and wall N' attached to their clause."""
    parts = re.split(r",(?!\s*while\b)\s*", text.strip())
    clauses: list[str] = []
    for part in parts:
        chunks = re.split(r"\s+and\s+(?=" + "|".join(_VERB_WORDS) + r"\b)",
                          part, flags=re.I)
        for chunk in chunks:
            chunk = re.sub(r"^\s*and\s+", "", chunk.strip(), flags=re.I)
            chunk = chunk.rstrip(". ")
            if chunk:
                clauses.append(chunk)
    return clauses


def _suggest(clause: str) -> str | None:
    close = difflib.get_close_matches(clause.lower(), _TEMPLATES, n=1, cutoff=0.0)
    return close[0] if close else None


def parse_clause(clause: str) -> list[EditCommand]:
    s = clause.strip().lower()

    if re.fullmatch(r"accept(ed)?", s):
        return [EditCommand("Accept")]
    if re.fullmatch(r"reject(ed)?", s):
        return [EditCommand("Reject")]
    if re.fullmatch(r"renumber(\s+ids)?", s):
        return [EditCommand("RenameId", None, {"canonicalize": True})]

    m = re.fullmatch(rf"move (the )?{_CLS}\s*{_NUM} to (the )?wall\s*{_NUM}", s)
    if m:
        return [EditCommand("ReHost", (_cls_name(m.group(2)), int(_number(m.group(3)))),
                            {"dest": int(_number(m.group(5)))})]

    m = re.fullmatch(rf"move (the )?{_CLS}\s*{_NUM} {_NUM} {_FT} to the {_DIR}", s)
    if m:
        return [EditCommand("MoveBy", (_cls_name(m.group(2)), int(_number(m.group(3)))),
                            {"direction": _direction(m.group(5)),
                             "distance": _number(m.group(4))})]

    m = re.fullmatch(rf"move (the )?{_CLS}\s*{_NUM} {_DIR} by {_NUM} {_FT}", s)
    if m:
        return [EditCommand("MoveBy", (_cls_name(m.group(2)), int(_number(m.group(3)))),
                            {"direction": _direction(m.group(4)),
                             "distance": _number(m.group(5))})]

    m = re.fullmatch(
        rf"(extend|shorten) (the )?{_CLS}\s*{_NUM}"
        rf"((?: and {_CLS}\s*{_NUM})*) {_DIR} by {_NUM} {_FT}", s)
    if m:
        verb = "Extend" if m.group(1) == "extend" else "Shorten"
        targets = [(_cls_name(m.group(3)), int(_number(m.group(4))))]
        for cm in re.finditer(rf"and {_CLS}\s*{_NUM}", m.group(5) or ""):
            targets.append((_cls_name(cm.group(1)), int(_number(cm.group(2)))))
        tail_dir = _direction(m.group(8))
        dist = _number(m.group(9))
        return [EditCommand(verb, t, {"direction": tail_dir, "distance": dist})
                for t in targets]

    m = re.fullmatch(rf"(remove|delete) (the )?{_CLS}\s*{_NUM}", s)
    if m:
        return [EditCommand("Remove", (_cls_name(m.group(3)), int(_number(m.group(4)))))]

    m = re.fullmatch(
        rf"add (a |an )?(door|window) to (the )?wall\s*{_NUM}"
        rf"(?: at {_NUM} {_FT})?", s)
    if m:
        params = {"dest": int(_number(m.group(4)))}
        if m.group(5):
            params["offset"] = _number(m.group(5))
        return [EditCommand("Add", (m.group(2), 0), params)]

    m = re.fullmatch(
        rf"connect (?:the )?wall\s*(?P<a>{_NUM}) (?:with|to) the (?P<de>{_END}) "
        rf"end of (?:the )?wall\s*(?P<b>{_NUM})"
        rf"(?:,? while keeping the (?P<ke>{_END}) end of (?:the )?(?:wall\s*|{_CLS}\s*)?"
        rf"(?P<kn>{_NUM}) connected to (?:the )?wall\s*(?P<kw>{_NUM}))?", s)
    if m:
        params = {"dest": int(_number(m.group("b"))), "dest_end": m.group("de")}
        if m.group("ke"):
            params["keep_end"] = m.group("ke")
            params["keep_wall"] = int(_number(m.group("kw")))
        return [EditCommand("Connect", ("wall", int(_number(m.group("a")))), params)]

    m = re.fullmatch(rf"set (the )?thickness of (the )?wall\s*{_NUM} to {_NUM} {_FT}?", s)
    if m:
        return [EditCommand("SetThickness", ("wall", int(_number(m.group(3)))),
                            {"thickness": _number(m.group(4))})]

    m = re.fullmatch(rf"split (the )?wall\s*{_NUM} at {_NUM} {_FT}", s)
    if m:
        return [EditCommand("Split", ("wall", int(_number(m.group(2)))),
                            {"at": _number(m.group(3))})]

    m = re.fullmatch(rf"merge (the )?wall\s*{_NUM} and (the )?wall\s*{_NUM}", s)
    if m:
        return [EditCommand("Merge", ("wall", int(_number(m.group(2)))),
                            {"other": int(_number(m.group(4)))})]

    m = re.fullmatch(rf"rename (the )?{_CLS}\s*{_NUM} to (the )?{_CLS}\s*{_NUM}", s)
    if m:
        return [EditCommand("RenameId", (_cls_name(m.group(2)), int(_number(m.group(3)))),
                            {"new": f"{_cls_name(m.group(5))}{int(_number(m.group(6)))}"})]

    raise UnparsableClause(clause, _suggest(clause))


def parse_feedback(text: str) -> list[EditCommand]:
    if not text or not text.strip():
        raise UnparsableClause(text or "")
    commands: list[EditCommand] = []
    for clause in split_clauses(text):
        commands.extend(parse_clause(clause))
    if not commands:
        raise UnparsableClause(text)
    return commands


def feedback_kind(commands: list[EditCommand]) -> str:
    """Accept | Reject | Edit classification for the refinement policy."""
    if len(commands) == 1 and commands[0].verb == "Accept":
        return "Accept"
    if len(commands) == 1 and commands[0].verb == "Reject":
        return "Reject"
    return "Edit"


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def _normalize_ref(eid: str) -> tuple[str, int] | None:
    m = re.fullmatch(r"\s*(wall|door|window|win|w|d)\s*_?\s*0*(\d+)\s*",
                     eid.strip().lower().replace(" ", "").replace("_", ""))
    if not m:
        return None
    cls = {"w": "window", "win": "window", "d": "door"}.get(m.group(1), m.group(1))
    return (cls, int(m.group(2)))


def _find_wall(layout: Layout, index: int) -> Wall:
    for w in layout.walls:
        if _normalize_ref(w.id) == ("wall", index):
            return w
    raise UnknownTarget(f"wall {index} not found")


def _find_opening(layout: Layout, cls: str, index: int) -> Opening:
    pool = layout.doors if cls == "door" else layout.windows
    for o in pool:
        ref = _normalize_ref(o.id)
        if ref is not None and ref[1] == index and ref[0] == cls:
            return o
    raise UnknownTarget(f"{cls} {index} not found")


def _find_element(layout: Layout, target: tuple[str, int]):
    cls, idx = target
    if cls == "wall":
        return _find_wall(layout, idx)
    return _find_opening(layout, cls, idx)


def _margins_on(host: Wall, width: float) -> tuple[float, float]:
    length = wall_length(host)
    return (C.OPENING_END_MARGIN + width / 2.0,
            length - C.OPENING_END_MARGIN - width / 2.0)


def _clamp_offset(opening: Opening, host: Wall, desired: float,
                  warnings: list[str]) -> float:
    lo, hi = _margins_on(host, opening.width)
    if lo > hi:
        raise GeometricallyImpossible(
            f"{host.id} (length {wall_length(host):.2f}) cannot host "
            f"{opening.id} (width {opening.width})")
    if desired < lo - 1e-9 or desired > hi + 1e-9:
        clamped = min(max(desired, lo), hi)
        warnings.append(f"{opening.id}: offset {desired:.2f} clamped to "
                        f"{clamped:.2f} on {host.id}")
        return round(clamped, 4)
    return round(desired, 4)


def _hosted(layout: Layout, wall_id: str) -> list[Opening]:
    return [o for o in layout.openings() if o.host == wall_id]


def _param_near(wall: Wall, p: Point2) -> float:
    """Arc-length parameter of the closest point on the wall to p."""
    if isinstance(wall, LineWall):
        length = wall_length(wall)
        if length == 0:
            return 0.0
        ux = (wall.end.x - wall.start.x) / length
        uy = (wall.end.y - wall.start.y) / length
        s = (p.x - wall.start.x) * ux + (p.y - wall.start.y) * uy
        return min(max(s, 0.0), length)
    ang = math.atan2(p.y - wall.center.y, p.x - wall.center.x)
    rel = (ang - wall.start_angle) * (1.0 if wall.ccw else -1.0)
    rel = rel % (2 * math.pi)
    if rel > wall.sweep:
        rel = 0.0 if rel - wall.sweep > (2 * math.pi - rel) else wall.sweep
    return rel * wall.radius


def _reproject_openings(layout: Layout, wall: Wall,
                        centers: dict[str, Point2], warnings: list[str]):
    """Re-anchor hosted openings to preserve their world centers."""
    for o in _hosted(layout, wall.id):
        if o.id not in centers:
            continue
        desired = _param_near(wall, centers[o.id])
        o.offset = _clamp_offset(o, wall, desired, warnings)


def _extremal_endpoint(wall: LineWall, direction: tuple[float, float]) -> str:
    score_s = wall.start.x * direction[0] + wall.start.y * direction[1]
    score_e = wall.end.x * direction[0] + wall.end.y * direction[1]
    return "start" if score_s > score_e else "end"


def _end_by_selector(wall: LineWall, selector: str) -> str:
    s, e = wall.start, wall.end
    key = {"top": lambda p: (p.y, p.x), "bottom": lambda p: (-p.y, -p.x),
           "left": lambda p: (-p.x, -p.y), "right": lambda p: (p.x, p.y)}[selector]
    return "start" if key(s) > key(e) else "end"


def _resnap_endpoints(layout: Layout, wall: LineWall):
    """Endpoints landing within tolerance of other geometry snap exactly."""
    for attr in ("start", "end"):
        p = getattr(wall, attr)
        best = None
        best_d = C.CONNECT_TOL
        for other in layout.walls:
            if other is wall:
                continue
            for q in (other.start, other.end):
                d = p.dist(q)
                if d <= best_d and d > 0:
                    best, best_d = q, d
        if best is not None:
            setattr(wall, attr, best)


def apply_command(layout: Layout, cmd: EditCommand,
                  warnings: list[str] | None = None) -> Layout:
    """Apply one command to a copy of the layout; raises EditError subclasses."""
    warnings = warnings if warnings is not None else []
    lay = copy.deepcopy(layout)
    _apply_in_place(lay, cmd, warnings)
    return lay


def _apply_in_place(lay: Layout, cmd: EditCommand, warnings: list[str]):
    verb = cmd.verb

    if verb in ("Accept", "Reject"):
        return

    if verb == "RenameId" and cmd.params.get("canonicalize"):
        renum = assign_canonical_ids(lay)
        lay.walls, lay.doors, lay.windows, lay.rooms = (
            renum.walls, renum.doors, renum.windows, renum.rooms)
        return

    if verb == "Add":
        cls = cmd.target[0]
        host = _find_wall(lay, cmd.params["dest"])
        width = (C.DOOR_WIDTH_DEFAULT if cls == "door" else C.WINDOW_WIDTH_DEFAULT)
        pool = lay.doors if cls == "door" else lay.windows
        prefix = "door" if cls == "door" else "win"
        taken = set(lay.element_ids())
        n = 1
        while f"{prefix}{n}" in taken:
            n += 1
        opening = Opening(
            f"{prefix}{n}", cls, host.id, 0.0, width,
            C.DEFAULT_DOOR_HEIGHT if cls == "door" else C.DEFAULT_WINDOW_HEIGHT,
            None if cls == "door" else C.DEFAULT_WINDOW_SILL)
        desired = cmd.params.get("offset", wall_length(host) / 2.0)
        opening.offset = _clamp_offset(opening, host, desired, warnings)
        pool.append(opening)
        return

    element = _find_element(lay, cmd.target)

    if verb == "Remove":
        if isinstance(element, (LineWall, ArcWall)):
            lay.walls = [w for w in lay.walls if w.id != element.id]
            orphans = [o.id for o in _hosted(lay, element.id)]
            if orphans:
                warnings.append(
                    f"{element.id} removed; orphaned openings: {', '.join(orphans)}")
        else:
            lay.doors = [o for o in lay.doors if o.id != element.id]
            lay.windows = [o for o in lay.windows if o.id != element.id]
        return

    if verb == "RenameId":
        new_id = cmd.params["new"]
        if new_id in lay.element_ids():
            raise GeometricallyImpossible(f"id {new_id!r} already in use")
        old_id = element.id
        element.id = new_id
        if isinstance(element, (LineWall, ArcWall)):
            for o in lay.openings():
                if o.host == old_id:
                    o.host = new_id
            for r in lay.rooms:
                r.wall_chain = [new_id if w == old_id else w for w in r.wall_chain]
        return

    if verb == "ReHost":
        if not isinstance(element, Opening):
            raise GeometricallyImpossible("only doors/windows can move to a wall")
        dest = _find_wall(lay, cmd.params["dest"])
        element.host = dest.id
        element.offset = _clamp_offset(element, dest, element.offset, warnings)
        return

    if verb == "MoveBy":
        direction = _DIR_VECTORS[cmd.params["direction"]]
        dist = cmd.params["distance"]
        if dist <= 0:
            raise GeometricallyImpossible("distance must be positive")
        if isinstance(element, Opening):
            host = lay.wall_by_id(element.host)
            if host is None:
                raise UnknownTarget(f"{element.id}: host {element.host!r} missing")
            tx, ty = wall_tangent_at(host, element.offset)
            shift = dist * (direction[0] * tx + direction[1] * ty)
            element.offset = _clamp_offset(element, host, element.offset + shift,
                                           warnings)
        else:
            if not isinstance(element, LineWall):
                dx, dy = dist * direction[0], dist * direction[1]
                element.center = Point2(element.center.x + dx, element.center.y + dy)
            else:
                dx, dy = dist * direction[0], dist * direction[1]
                element.start = Point2(element.start.x + dx, element.start.y + dy)
                element.end = Point2(element.end.x + dx, element.end.y + dy)
                _resnap_endpoints(lay, element)
        return

    if verb in ("Extend", "Shorten"):
        if not isinstance(element, LineWall):
            raise GeometricallyImpossible(f"{verb.lower()} applies to line walls")
        direction = _DIR_VECTORS[cmd.params["direction"]]
        dist = cmd.params["distance"]
        if dist <= 0:
            raise GeometricallyImpossible("distance must be positive")
        centers = {o.id: wall_point_at(element, o.offset)
                   for o in _hosted(lay, element.id)}
        which = _extremal_endpoint(element, direction)
        sign = 1.0 if verb == "Extend" else -1.0
        p = getattr(element, which)
        moved = Point2(p.x + sign * dist * direction[0],
                       p.y + sign * dist * direction[1])
        setattr(element, which, moved)
        if wall_length(element) <= C.CONNECT_TOL:
            raise GeometricallyImpossible(
                f"{element.id}: {verb.lower()} collapses the wall")
        _reproject_openings(lay, element, centers, warnings)
        return

    if verb == "Connect":
        if not isinstance(element, LineWall):
            raise GeometricallyImpossible("connect applies to line walls")
        dest = _find_wall(lay, cmd.params["dest"])
        if not isinstance(dest, LineWall):
            snap = dest.start if cmd.params["dest_end"] in ("bottom", "left") else dest.end
        else:
            snap = getattr(dest, _end_by_selector(dest, cmd.params["dest_end"]))
        centers = {o.id: wall_point_at(element, o.offset)
                   for o in _hosted(lay, element.id)}
        if "keep_end" in cmd.params:
            keep_attr = _end_by_selector(element, cmd.params["keep_end"])
            keep_wall = _find_wall(lay, cmd.params["keep_wall"])
            pinned = getattr(element, keep_attr)
            near = _param_near(keep_wall, pinned)
            if wall_point_at(keep_wall, near).dist(pinned) > C.CONNECT_TOL:
                warnings.append(
                    f"{element.id}: {cmd.params['keep_end']} end is not on "
                    f"{keep_wall.id}; keeping it pinned anyway")
            moving_attr = "end" if keep_attr == "start" else "start"
        else:
            moving_attr = ("start" if element.start.dist(snap) <= element.end.dist(snap)
                           else "end")
        other_attr = "end" if moving_attr == "start" else "start"
        if getattr(element, other_attr).dist(snap) <= C.CONNECT_TOL:
            raise GeometricallyImpossible(
                f"{element.id}: both connect constraints land on the same endpoint")
        setattr(element, moving_attr, snap)
        _reproject_openings(lay, element, centers, warnings)
        return

    if verb == "SetThickness":
        if not isinstance(element, (LineWall, ArcWall)):
            raise GeometricallyImpossible("thickness applies to walls")
        t = cmd.params["thickness"]
        if t <= 0:
            raise GeometricallyImpossible("thickness must be positive")
        element.thickness = t
        return

    if verb == "Split":
        if not isinstance(element, LineWall):
            raise GeometricallyImpossible("split applies to line walls")
        at = cmd.params["at"]
        length = wall_length(element)
        if not (C.CONNECT_TOL < at < length - C.CONNECT_TOL):
            raise GeometricallyImpossible(
                f"split point {at} outside (0, {length:.2f})")
        taken = set(lay.element_ids())
        n = 1
        while f"wall{n}" in taken:
            n += 1
        mid = wall_point_at(element, at)
        second = LineWall(f"wall{n}", mid, element.end,
                          element.thickness, element.height)
        for o in _hosted(lay, element.id):
            if abs(o.offset - at) < o.width / 2.0 + C.OPENING_SPACING:
                raise GeometricallyImpossible(
                    f"{o.id} straddles the split point on {element.id}")
            if o.offset > at:
                o.host = second.id
                o.offset = round(o.offset - at, 4)
        element.end = mid
        lay.walls.insert(lay.walls.index(element) + 1, second)
        return

    if verb == "Merge":
        other = _find_wall(lay, cmd.params["other"])
        if element is other:
            raise GeometricallyImpossible("cannot merge a wall with itself")
        if not (isinstance(element, LineWall) and isinstance(other, LineWall)):
            raise GeometricallyImpossible("merge applies to line walls")
        a1 = math.atan2(element.end.y - element.start.y,
                        element.end.x - element.start.x) % math.pi
        a2 = math.atan2(other.end.y - other.start.y,
                        other.end.x - other.start.x) % math.pi
        dang = min(abs(a1 - a2), math.pi - abs(a1 - a2))
        if dang > math.radians(C.MERGE_ANGLE_MAX_DEG):
            raise GeometricallyImpossible("walls are not collinear")
        pts = [element.start, element.end, other.start, other.end]
        shared = min((p.dist(q) for p in (element.start, element.end)
                      for q in (other.start, other.end)))
        if shared > C.CONNECT_TOL:
            raise GeometricallyImpossible("walls do not share an endpoint")
        # keep the lower-numbered id, span the extreme endpoints
        keep, drop = element, other
        ka = _normalize_ref(keep.id) or ("wall", 1 << 30)
        kb = _normalize_ref(drop.id) or ("wall", 1 << 30)
        if kb[1] < ka[1]:
            keep, drop = drop, keep
        centers = {o.id: wall_point_at(lay.wall_by_id(o.host), o.offset)
                   for o in lay.openings() if o.host in (keep.id, drop.id)}
        ux, uy = math.cos(a1), math.sin(a1)
        params = [(p.x * ux + p.y * uy, p) for p in pts]
        params.sort(key=lambda t: t[0])
        keep.start, keep.end = params[0][1], params[-1][1]
        for o in lay.openings():
            if o.host == drop.id:
                o.host = keep.id
        lay.walls = [w for w in lay.walls if w.id != drop.id]
        for r in lay.rooms:
            r.wall_chain = [keep.id if w == drop.id else w for w in r.wall_chain]
        _reproject_openings(lay, keep, centers, warnings)
        return

    raise UnparsableClause(f"unsupported verb {verb}")


def apply_feedback(layout: Layout, text: str) -> FeedbackOutcome:
    """Parse and apply a whole feedback line atomically (left-to-right)."""
    commands = parse_feedback(text)
    warnings: list[str] = []
    lay = copy.deepcopy(layout)
    for cmd in commands:
        _apply_in_place(lay, cmd, warnings)
    return FeedbackOutcome(lay, commands, warnings)
