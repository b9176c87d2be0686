"""Triangle meshes for walls, opening panels, and slabs, plus OBJ export.

Walls are meshed on a global (length, height) lattice whose cut lines include
every opening boundary (and, for arcs, the chordal subdivision), so every
emitted face shares whole edges with its neighbours: each undirected edge is
used by exactly two triangles and each directed edge once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import constants as C
from .geometry import ArcWall, LineWall, Opening, Point2, Wall, wall_length


@dataclass
class TriMesh:
    vertices: list[tuple[float, float, float]] = field(default_factory=list)
    triangles: list[tuple[int, int, int]] = field(default_factory=list)

    def add_vertex(self, p: tuple[float, float, float]) -> int:
        self.vertices.append(p)
        return len(self.vertices) - 1


@dataclass
class ModelElement:
    source_id: str
    cls: str        # wall | door | window | slab
    mesh: TriMesh


@dataclass
class Model3D:
    elements: list[ModelElement] = field(default_factory=list)
    slab_polygon: list[Point2] = field(default_factory=list)

    def count(self, cls: str) -> int:
        return sum(1 for e in self.elements if e.cls == cls)


# ---------------------------------------------------------------------------
# Watertightness / topology checks
# ---------------------------------------------------------------------------

def edge_incidence(mesh: TriMesh) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for a, b, c in mesh.triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            key = (min(u, v), max(u, v))
            counts[key] = counts.get(key, 0) + 1
    return counts


def is_watertight(mesh: TriMesh) -> bool:
    """Every undirected edge shared by exactly 2 triangles, each directed edge
    used exactly once."""
    if not mesh.triangles:
        return False
    directed: set[tuple[int, int]] = set()
    for a, b, c in mesh.triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            if (u, v) in directed:
                return False
            directed.add((u, v))
    return all(n == 2 for n in edge_incidence(mesh).values())


def euler_characteristic(mesh: TriMesh) -> int:
    used = {i for tri in mesh.triangles for i in tri}
    e = len(edge_incidence(mesh))
    return len(used) - e + len(mesh.triangles)


# ---------------------------------------------------------------------------
# Wall meshing on an (s, z) lattice
# ---------------------------------------------------------------------------

def _lattice(values: list[float], tol: float = 1e-9) -> list[float]:
    out: list[float] = []
    for v in sorted(values):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def wall_mesh(wall: Wall, openings: list[Opening]) -> TriMesh:
    """Extruded wall solid with rectangular holes cut for its openings."""
    length = wall_length(wall)
    height = wall.height
    half_t = wall.thickness / 2.0

    s_cuts = [0.0, length]
    z_cuts = [0.0, height]
    holes: list[tuple[float, float, float, float]] = []  # (s0, s1, z0, z1)
    for o in openings:
        s0, s1 = o.offset - o.width / 2.0, o.offset + o.width / 2.0
        if o.cls == "door":
            z0, z1 = 0.0, min(o.height, height)
        else:
            sill = o.sill if o.sill is not None else C.DEFAULT_WINDOW_SILL
            z0, z1 = sill, min(sill + o.height, height)
        holes.append((s0, s1, z0, z1))
        s_cuts += [s0, s1]
        z_cuts += [z0, z1]

    if isinstance(wall, ArcWall):
        # global chordal subdivision keeps curvature error bounded
        n = max(16, int(math.ceil(length / max(
            2.0 * math.sqrt(max(2.0 * wall.radius * C.ARC_SAMPLE_SAGITTA
                                - C.ARC_SAMPLE_SAGITTA ** 2, 1e-9)), 1e-6))))
        s_cuts += [length * i / n for i in range(1, n)]

    S = _lattice(s_cuts)
    Z = _lattice(z_cuts)

    def solid(i: int, j: int) -> bool:
        sm = (S[i] + S[i + 1]) / 2.0
        zm = (Z[j] + Z[j + 1]) / 2.0
        return not any(s0 < sm < s1 and z0 < zm < z1 for s0, s1, z0, z1 in holes)

    if isinstance(wall, LineWall):
        ux = (wall.end.x - wall.start.x) / length
        uy = (wall.end.y - wall.start.y) / length
        nx, ny = -uy, ux
        def world(s: float, t: float, z: float) -> tuple[float, float, float]:
            return (wall.start.x + s * ux + t * nx,
                    wall.start.y + s * uy + t * ny, z)
    else:
        sgn = 1.0 if wall.ccw else -1.0
        def world(s: float, t: float, z: float) -> tuple[float, float, float]:
            ang = wall.start_angle + sgn * s / wall.radius
            r = wall.radius + t
            return (wall.center.x + r * math.cos(ang),
                    wall.center.y + r * math.sin(ang), z)

    mesh = TriMesh()
    vid: dict[tuple[int, int, int], int] = {}  # (si, ti, zi); ti in {0, 1}
    t_of = (-half_t, half_t)

    def vertex(si: int, ti: int, zi: int) -> int:
        key = (si, ti, zi)
        if key not in vid:
            vid[key] = mesh.add_vertex(world(S[si], t_of[ti], Z[zi]))
        return vid[key]

    def quad(ids: tuple[int, int, int, int], outward_ref: tuple[float, float, float]):
        a, b, c, d = ids
        va, vb, vc = mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]
        e1 = tuple(vb[k] - va[k] for k in range(3))
        e2 = tuple(vc[k] - va[k] for k in range(3))
        normal = (e1[1] * e2[2] - e1[2] * e2[1],
                  e1[2] * e2[0] - e1[0] * e2[2],
                  e1[0] * e2[1] - e1[1] * e2[0])
        centroid = tuple(sum(mesh.vertices[i][k] for i in ids) / 4.0
                         for k in range(3))
        out = tuple(centroid[k] - outward_ref[k] for k in range(3))
        if sum(normal[k] * out[k] for k in range(3)) < 0:
            a, b, c, d = a, d, c, b
        mesh.triangles.append((a, b, c))
        mesh.triangles.append((a, c, d))

    ni, nj = len(S) - 1, len(Z) - 1
    for i in range(ni):
        for j in range(nj):
            if not solid(i, j):
                continue
            cell_center = tuple(
                (world(S[i], -half_t, Z[j])[k] + world(S[i + 1], half_t, Z[j + 1])[k])
                / 2.0 for k in range(3))
            # front/back (single cell across thickness: always boundary)
            quad((vertex(i, 1, j), vertex(i + 1, 1, j),
                  vertex(i + 1, 1, j + 1), vertex(i, 1, j + 1)), cell_center)
            quad((vertex(i, 0, j), vertex(i + 1, 0, j),
                  vertex(i + 1, 0, j + 1), vertex(i, 0, j + 1)), cell_center)
            # caps along s
            if i == 0 or not solid(i - 1, j):
                quad((vertex(i, 0, j), vertex(i, 1, j),
                      vertex(i, 1, j + 1), vertex(i, 0, j + 1)), cell_center)
            if i == ni - 1 or not solid(i + 1, j):
                quad((vertex(i + 1, 0, j), vertex(i + 1, 1, j),
                      vertex(i + 1, 1, j + 1), vertex(i + 1, 0, j + 1)), cell_center)
            # caps along z
            if j == 0 or not solid(i, j - 1):
                quad((vertex(i, 0, j), vertex(i + 1, 0, j),
                      vertex(i + 1, 1, j), vertex(i, 1, j)), cell_center)
            if j == nj - 1 or not solid(i, j + 1):
                quad((vertex(i, 0, j + 1), vertex(i + 1, 0, j + 1),
                      vertex(i + 1, 1, j + 1), vertex(i, 1, j + 1)), cell_center)
    return mesh


def panel_mesh(wall: Wall, opening: Opening,
               panel_thickness: float = 0.1) -> TriMesh:
    """Thin visibility panel filling the opening (tangent chord on arcs)."""
    from .geometry import opening_world_span
    a, b = opening_world_span(opening, wall)
    if opening.cls == "door":
        z0, z1 = 0.0, min(opening.height, wall.height)
    else:
        sill = opening.sill if opening.sill is not None else C.DEFAULT_WINDOW_SILL
        z0, z1 = sill, min(sill + opening.height, wall.height)
    ux, uy = b.x - a.x, b.y - a.y
    norm = math.hypot(ux, uy)
    nx, ny = -uy / norm * panel_thickness / 2.0, ux / norm * panel_thickness / 2.0
    mesh = TriMesh()
    corners = []
    for t in (-1.0, 1.0):
        for p in (a, b):
            for z in (z0, z1):
                corners.append(mesh.add_vertex((p.x + t * nx, p.y + t * ny, z)))
    # corners order: t-,a,z0 | t-,a,z1 | t-,b,z0 | t-,b,z1 | t+,a,z0 ...
    Am, At, Bm, Bt, Ap, Aq, Bp, Bq = corners
    quads = [
        (Am, Bm, Bt, At),  # t- side
        (Ap, Bp, Bq, Aq),  # t+ side
        (Am, Ap, Aq, At),  # a cap
        (Bm, Bp, Bq, Bt),  # b cap
        (Am, Bm, Bp, Ap),  # bottom
        (At, Bt, Bq, Aq),  # top
    ]
    centroid = tuple(sum(v[k] for v in mesh.vertices) / 8.0 for k in range(3))
    for q in quads:
        a0, b0, c0, d0 = q
        va, vb, vc = (mesh.vertices[i] for i in (a0, b0, c0))
        e1 = tuple(vb[k] - va[k] for k in range(3))
        e2 = tuple(vc[k] - va[k] for k in range(3))
        normal = (e1[1] * e2[2] - e1[2] * e2[1],
                  e1[2] * e2[0] - e1[0] * e2[2],
                  e1[0] * e2[1] - e1[1] * e2[0])
        face_c = tuple(sum(mesh.vertices[i][k] for i in q) / 4.0 for k in range(3))
        out = tuple(face_c[k] - centroid[k] for k in range(3))
        if sum(normal[k] * out[k] for k in range(3)) < 0:
            a0, b0, c0, d0 = a0, d0, c0, b0
        mesh.triangles.append((a0, b0, c0))
        mesh.triangles.append((a0, c0, d0))
    return mesh


# ---------------------------------------------------------------------------
# Slab: ear-clipped polygon extrusion
# ---------------------------------------------------------------------------

def ear_clip(polygon: list[Point2]) -> list[tuple[int, int, int]]:
    """Triangulate a simple CCW polygon using only its own vertices."""
    n = len(polygon)
    if n < 3:
        return []
    idx = list(range(n))
    tris: list[tuple[int, int, int]] = []

    def cross(o, a, b):
        return ((polygon[a].x - polygon[o].x) * (polygon[b].y - polygon[o].y)
                - (polygon[a].y - polygon[o].y) * (polygon[b].x - polygon[o].x))

    def inside(p, a, b, c) -> bool:
        d1 = cross(a, b, p)
        d2 = cross(b, c, p)
        d3 = cross(c, a, p)
        return d1 > 1e-12 and d2 > 1e-12 and d3 > 1e-12

    guard = 0
    while len(idx) > 3 and guard < 10 * n * n:
        guard += 1
        clipped = False
        for k in range(len(idx)):
            a = idx[(k - 1) % len(idx)]
            b = idx[k]
            c = idx[(k + 1) % len(idx)]
            cv = cross(a, b, c)
            if cv <= 1e-12:
                continue
            if any(inside(p, a, b, c) for p in idx if p not in (a, b, c)):
                continue
            tris.append((a, b, c))
            idx.pop(k)
            clipped = True
            break
        if not clipped:
            # only collinear candidates left: clip a zero-area ear to keep the
            # ring's edges intact (degenerate but topologically sound)
            for k in range(len(idx)):
                a = idx[(k - 1) % len(idx)]
                b = idx[k]
                c = idx[(k + 1) % len(idx)]
                if abs(cross(a, b, c)) <= 1e-12:
                    tris.append((a, b, c))
                    idx.pop(k)
                    clipped = True
                    break
            if not clipped:
                break
    if len(idx) == 3:
        tris.append((idx[0], idx[1], idx[2]))
    return tris


def slab_mesh(polygon: list[Point2],
              thickness: float = C.SLAB_THICKNESS) -> TriMesh:
    """Slab solid: the footprint extruded downward from z=0."""
    mesh = TriMesh()
    n = len(polygon)
    top = [mesh.add_vertex((p.x, p.y, 0.0)) for p in polygon]
    bot = [mesh.add_vertex((p.x, p.y, -thickness)) for p in polygon]
    for a, b, c in ear_clip(polygon):
        mesh.triangles.append((top[a], top[b], top[c]))          # up
        mesh.triangles.append((bot[a], bot[c], bot[b]))          # down
    for i in range(n):
        j = (i + 1) % n
        # outward side quad (polygon CCW: outside is to the right of i->j)
        mesh.triangles.append((top[i], bot[i], bot[j]))
        mesh.triangles.append((top[i], bot[j], top[j]))
    return mesh


# ---------------------------------------------------------------------------
# OBJ export
# ---------------------------------------------------------------------------

def export_obj(model: Model3D) -> bytes:
    lines = ["# units: feet"]
    base = 0
    for el in model.elements:
        lines.append(f"o {el.source_id}")
        for v in el.mesh.vertices:
            lines.append(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}")
        for a, b, c in el.mesh.triangles:
            lines.append(f"f {base + a + 1} {base + b + 1} {base + c + 1}")
        base += len(el.mesh.vertices)
    return ("\n".join(lines) + "\n").encode()
