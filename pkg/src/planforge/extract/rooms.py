"""Room extraction: half-edge face enumeration with sliver absorption.

Bounded faces of the noded wall graph become CCW room polygons following the
actual wall chain; faces narrower than the sliver width are merged into the
neighbour sharing the longest boundary. Openings annotate walls, never cut.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import constants as C
from .. import planar
from ..geometry import Point2, Room, Wall, signed_area


class NoBoundedFace(planar.NoBoundedFace):
    pass


@dataclass
class _FaceRec:
    pieces: list            # directed Piece list (CCW)
    polygon: list[Point2]
    area: float


def _piece_key(piece) -> tuple:
    a, b = piece.a.as_tuple(), piece.b.as_tuple()
    return (min(a, b), max(a, b), piece.kind, round(piece.radius, 6))


def extract_rooms(walls: list[Wall]) -> tuple[list[Room], list[str]]:
    """Rooms from the wall arrangement; raises NoBoundedFace when nothing
    closes."""
    log: list[str] = []
    pieces = planar.node_walls(walls)
    try:
        faces = planar.bounded_faces(pieces)
    except planar.NoBoundedFace as e:
        raise NoBoundedFace(str(e)) from e

    recs = [_FaceRec([e.directed_piece() for e in f.edges], f.polygon, f.area)
            for f in faces]

    # absorb slivers into the neighbour sharing the longest boundary
    changed = True
    guard = 0
    while changed and guard < 2 * len(recs) + 4:
        changed = False
        guard += 1
        for i, rec in enumerate(recs):
            width = planar.min_caliper_width(rec.polygon)
            if width >= C.SLIVER_WIDTH or len(recs) == 1:
                continue
            shared_len: dict[int, float] = {}
            mine = {_piece_key(p) for p in rec.pieces}
            for j, other in enumerate(recs):
                if j == i:
                    continue
                for p in other.pieces:
                    if _piece_key(p) in mine:
                        shared_len[j] = shared_len.get(j, 0.0) + p.length()
            if not shared_len:
                continue
            target = max(sorted(shared_len), key=lambda j: shared_len[j])
            merged = _merge_faces(recs[target], rec)
            if merged is None:
                continue
            log.append(f"rooms: sliver (width {width:.2f} ft) merged into "
                       "neighbour")
            recs[target] = merged
            recs.pop(i)
            changed = True
            break

    rooms: list[Room] = []
    for k, rec in enumerate(sorted(recs, key=lambda r: (
            round(min(p.x for p in r.polygon), 3),
            round(min(p.y for p in r.polygon), 3)))):
        poly = _dedupe(rec.polygon)
        if len(poly) < 3 or signed_area(poly) <= 0:
            continue
        chain = []
        for p in rec.pieces:
            if not chain or chain[-1] != p.source_id:
                chain.append(p.source_id)
        if len(chain) > 1 and chain[0] == chain[-1]:
            chain.pop()
        rooms.append(Room(f"tmp_room{k}", poly, chain))
    if not rooms:
        raise NoBoundedFace("all faces merged or degenerate")
    return rooms, log


def _dedupe(poly: list[Point2]) -> list[Point2]:
    out: list[Point2] = []
    for p in poly:
        if not out or out[-1].dist(p) > 1e-9:
            out.append(p)
    if len(out) > 1 and out[0].dist(out[-1]) <= 1e-9:
        out.pop()
    return out


def _merge_faces(target: _FaceRec, sliver: _FaceRec) -> _FaceRec | None:
    """Union of two adjacent faces: drop shared pieces, re-chain the rest."""
    shared = {_piece_key(p) for p in target.pieces} & \
             {_piece_key(p) for p in sliver.pieces}
    remaining = [p for p in target.pieces + sliver.pieces
                 if _piece_key(p) not in shared]
    if not remaining:
        return None
    start_map: dict[tuple, list] = {}
    for p in remaining:
        start_map.setdefault(p.a.as_tuple(), []).append(p)
    chain = [remaining[0]]
    used = {id(remaining[0])}
    for _ in range(len(remaining) - 1):
        nxt_candidates = [p for p in start_map.get(chain[-1].b.as_tuple(), [])
                          if id(p) not in used]
        if not nxt_candidates:
            return None
        nxt = nxt_candidates[0]
        chain.append(nxt)
        used.add(id(nxt))
    if chain[-1].b.as_tuple() != chain[0].a.as_tuple():
        return None
    polygon: list[Point2] = []
    for p in chain:
        polygon.extend(p.polyline()[:-1])
    if len(polygon) < 3:
        return None
    return _FaceRec(chain, polygon, signed_area(polygon))
