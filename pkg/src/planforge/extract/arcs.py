"""Arc recovery from point runs the line pass could not explain.

Each candidate group is ordered by angle around an algebraic circle fit, then
refit through (first, mid, last) samples; acceptance is bounded by the max
radial residual. Rejected groups fall back to a polyline of line segments.
"""

from __future__ import annotations

import math

import numpy as np

from .. import constants as C
from ..geometry import ArcWall, CollinearPoints, Point2, arc_from_3pt
from .raster import _kasa_circle
from .segments import WorldSegment


class ArcRejected(ValueError):
    pass


def group_points(points: np.ndarray, link_dist: float = 3.0,
                 min_size: int = 25) -> list[np.ndarray]:
    """Union-find grouping of nearby points (grid-hashed)."""
    n = len(points)
    if n == 0:
        return []
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
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

    cell = link_dist
    grid: dict[tuple[int, int], list[int]] = {}
    for i, p in enumerate(pts):
        grid.setdefault((int(p[0] // cell), int(p[1] // cell)), []).append(i)
    for (cx, cy), members in grid.items():
        neigh = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                neigh.extend(grid.get((cx + dx, cy + dy), ()))
        for i in members:
            for j in neigh:
                if j > i and np.hypot(*(pts[i] - pts[j])) <= link_dist:
                    union(i, j)
    buckets: dict[int, list[int]] = {}
    for i in range(n):
        buckets.setdefault(find(i), []).append(i)
    groups = [pts[idx] for idx in buckets.values() if len(idx) >= min_size]
    groups.sort(key=lambda g: (round(g[:, 0].min(), 3), round(g[:, 1].min(), 3)))
    return groups


def _order_along_curve(points: np.ndarray) -> np.ndarray:
    """Order points by angle around an algebraic fit, unwrapping at the
    largest angular gap."""
    circle = _kasa_circle(points)
    if circle is None:
        raise ArcRejected("too few points for a circle fit")
    cx, cy, _ = circle
    angles = np.arctan2(points[:, 1] - cy, points[:, 0] - cx)
    order = np.argsort(angles, kind="stable")
    sorted_ang = angles[order]
    gaps = np.diff(np.concatenate([sorted_ang, [sorted_ang[0] + 2 * math.pi]]))
    cut = int(np.argmax(gaps))
    return np.concatenate([order[cut + 1:], order[:cut + 1]])


def fit_arc(points: np.ndarray):
    """ArcWall geometry through (first, mid, last) of the recovered centerline.

    Stroke noise is averaged out along the run before fitting: the sagitta
    tolerance applies to the centerline the ink represents, which raw pixel
    jitter would otherwise make unattainable. Raises ArcRejected when the max
    centerline residual exceeds the tolerance, CollinearPoints when straight.
    """
    ordered = points[_order_along_curve(points)]
    n = len(ordered)

    def window_mean(lo_frac: float, hi_frac: float) -> Point2:
        lo = int(lo_frac * n)
        hi = max(int(hi_frac * n), lo + 1)
        seg = ordered[lo:hi]
        return Point2(float(seg[:, 0].mean()), float(seg[:, 1].mean()))

    p0 = window_mean(0.00, 0.12)
    pm = window_mean(0.44, 0.56)
    p1 = window_mean(0.88, 1.00)
    geom = arc_from_3pt(p0, pm, p1)  # may raise CollinearPoints
    # residual check over bin-averaged centerline samples
    nbins = min(16, max(4, n // 8))
    bins = np.array_split(ordered, nbins)
    means = np.array([[b[:, 0].mean(), b[:, 1].mean()] for b in bins if len(b)])
    resid = np.abs(np.hypot(means[:, 0] - geom.center.x,
                            means[:, 1] - geom.center.y) - geom.radius)
    if float(resid.max()) > C.ARC_SAGITTA_TOL:
        raise ArcRejected(f"max centerline residual {resid.max():.3f} ft "
                          f"exceeds {C.ARC_SAGITTA_TOL} ft")
    # extend to the full ink span: endpoints from the outermost samples
    tip0 = Point2(float(ordered[:6, 0].mean()), float(ordered[:6, 1].mean()))
    tip1 = Point2(float(ordered[-6:, 0].mean()), float(ordered[-6:, 1].mean()))
    geom = _respan(geom, tip0, tip1)
    return geom


def _respan(geom, tip0: Point2, tip1: Point2):
    """Re-span the fitted circle between the measured tips, keeping
    orientation."""
    from ..geometry import ArcGeom, normalize_sweep
    a0 = math.atan2(tip0.y - geom.center.y, tip0.x - geom.center.x)
    a1 = math.atan2(tip1.y - geom.center.y, tip1.x - geom.center.x)
    raw = (a1 - a0) if geom.ccw else (a0 - a1)
    try:
        sweep = normalize_sweep(raw)
    except Exception:
        return geom
    return ArcGeom(geom.center, geom.radius, a0, sweep, geom.ccw)


def polyline_fallback(points: np.ndarray,
                      epsilon: float = 0.25) -> list[WorldSegment]:
    """Douglas-Peucker split of an ordered run into line segments."""
    if len(points) < 2:
        return []
    try:
        pts = points[_order_along_curve(points)]
    except ArcRejected:
        return []

    def dp(lo: int, hi: int, out: list[int]):
        if hi - lo < 2:
            return
        a, b = pts[lo], pts[hi]
        d = np.abs(np.cross(b - a, pts[lo + 1:hi] - a)) / max(
            np.hypot(*(b - a)), 1e-9)
        k = int(np.argmax(d))
        if d[k] > epsilon:
            dp(lo, lo + 1 + k, out)
            out.append(lo + 1 + k)
            dp(lo + 1 + k, hi, out)

    knots = [0]
    dp(0, len(pts) - 1, knots)
    knots.append(len(pts) - 1)
    knots = sorted(set(knots))
    segs = []
    for i, j in zip(knots, knots[1:]):
        a, b = pts[i], pts[j]
        if math.hypot(*(b - a)) >= C.STUB_MIN_LENGTH:
            segs.append(WorldSegment(Point2(*a), Point2(*b), support=j - i))
    return segs


def chains_to_arcs(segments: list[WorldSegment]
                   ) -> tuple[list[WorldSegment], list[ArcWall], list[str]]:
    """Reassemble runs of short segments turning consistently into arcs.

    Hough bands clip arcs into tangent chords whose in-band curvature is too
    shallow to flag point-wise; the chord chain (3+ joints turning the same
    way by 5..35 degrees) is unambiguous, and the joints lie on the circle.
    """
    log: list[str] = []
    segs = list(segments)
    used: set[int] = set()
    arcs: list[ArcWall] = []

    def endpoints(s: WorldSegment):
        return (s.a, s.b)

    def neighbors(i: int, p) -> list[tuple[int, int]]:
        out = []
        for j, s2 in enumerate(segs):
            if j == i or j in used:
                continue
            for which, q in enumerate(endpoints(s2)):
                if p.dist(q) <= 1.2:
                    out.append((j, which))
        return out

    def turn(s1: WorldSegment, flip1: bool, s2: WorldSegment, flip2: bool) -> float:
        a1, b1 = (s1.b, s1.a) if flip1 else (s1.a, s1.b)
        a2, b2 = (s2.b, s2.a) if flip2 else (s2.a, s2.b)
        h1 = math.atan2(b1.y - a1.y, b1.x - a1.x)
        h2 = math.atan2(b2.y - a2.y, b2.x - a2.x)
        return (h2 - h1 + math.pi) % (2 * math.pi) - math.pi

    order = sorted(range(len(segs)), key=lambda i: -segs[i].length())
    for start in order:
        if start in used or not (1.0 <= segs[start].length() <= 9.0):
            continue
        for flip_start in (False, True):
            chain = [(start, flip_start)]
            sign = 0.0
            while True:
                i, flip = chain[-1]
                tip = segs[i].a if flip else segs[i].b
                step = None
                for j, which in neighbors(i, tip):
                    if any(j == k for k, _ in chain):
                        continue
                    if not (1.0 <= segs[j].length() <= 9.0):
                        continue
                    flip_j = which == 1
                    t = turn(segs[i], flip, segs[j], flip_j)
                    if math.radians(5) <= abs(t) <= math.radians(42):
                        if sign == 0.0 or (t > 0) == (sign > 0):
                            step = (j, flip_j, t)
                            break
                if step is None:
                    break
                chain.append((step[0], step[1]))
                sign = sign or step[2]
            if len(chain) < 3:
                continue
            pts = []
            first_i, first_flip = chain[0]
            pts.append(segs[first_i].b if first_flip else segs[first_i].a)
            for i, flip in chain:
                pts.append(segs[i].a if flip else segs[i].b)
            arr = np.array([[p.x, p.y] for p in pts])
            try:
                geom = arc_from_3pt(Point2(*arr[0]),
                                    Point2(*arr[len(arr) // 2]),
                                    Point2(*arr[-1]))
            except CollinearPoints:
                continue
            resid = np.abs(np.hypot(arr[:, 0] - geom.center.x,
                                    arr[:, 1] - geom.center.y) - geom.radius)
            if float(resid.max()) > 3.0 * C.ARC_SAGITTA_TOL:
                continue
            arcs.append(ArcWall(f"chain_arc{len(arcs)}", geom.center,
                                geom.radius, geom.start_angle, geom.sweep,
                                geom.ccw))
            used.update(i for i, _ in chain)
            log.append(f"arcs: {len(chain)} chord segments refit as an arc "
                       f"(r={geom.radius:.1f} ft)")
            break
    remaining = [s for i, s in enumerate(segs) if i not in used]
    return remaining, arcs, log


def refine_arcs_with_ink(arcs: list[ArcWall], segments: list[WorldSegment],
                         ink_world: np.ndarray
                         ) -> tuple[list[ArcWall], list[WorldSegment], list[str]]:
    """Refit located arcs against the full ink cloud and absorb leftover
    chord segments riding the refined circle.

    Chain reassembly under-spans (end chords merge into neighbours or fall to
    noise); the ink within a band of the candidate circle recovers the full
    sweep and a clean radius.
    """
    log: list[str] = []
    refined: list[ArcWall] = []
    keep = list(segments)
    for arc in arcs:
        out = arc
        if len(ink_world):
            center, radius = arc.center, arc.radius
            # angular window of the candidate (plus margin) excludes nearby
            # straight-wall ink that would otherwise contaminate the refit
            margin = math.radians(25.0)
            sgn = 1.0 if arc.ccw else -1.0

            def in_window(pts: np.ndarray) -> np.ndarray:
                ang = np.arctan2(pts[:, 1] - arc.center.y,
                                 pts[:, 0] - arc.center.x)
                rel = (sgn * (ang - arc.start_angle)) % (2 * math.pi)
                return (rel <= arc.sweep + margin) | (rel >= 2 * math.pi - margin)

            # iterative band reselection: the located circle may be off by
            # more than the final tolerance
            for band_width in (2.0, 1.2, 0.8):
                d = np.abs(np.hypot(ink_world[:, 0] - center.x,
                                    ink_world[:, 1] - center.y) - radius)
                sel = (d <= band_width) & in_window(ink_world)
                band = ink_world[sel]
                if len(band) < 40:
                    break
                circle = _kasa_circle(band)
                if circle is None:
                    break
                center = Point2(circle[0], circle[1])
                radius = circle[2]
            d = np.abs(np.hypot(ink_world[:, 0] - center.x,
                                ink_world[:, 1] - center.y) - radius)
            band = ink_world[(d <= 0.8) & in_window(ink_world)]
            if len(band) >= 40:
                try:
                    geom = fit_arc(band)
                    out = ArcWall(arc.id, geom.center, geom.radius,
                                  geom.start_angle, geom.sweep, geom.ccw,
                                  arc.thickness, arc.height)
                    log.append(f"arcs: refined against ink "
                               f"(r={geom.radius:.2f} ft, "
                               f"sweep={math.degrees(geom.sweep):.0f} deg)")
                except (ArcRejected, CollinearPoints):
                    pass
        survivors = []
        for s in keep:
            mid = Point2((s.a.x + s.b.x) / 2, (s.a.y + s.b.y) / 2)
            on_circle = all(
                abs(p.dist(out.center) - out.radius) <= 0.8
                for p in (s.a, s.b, mid))
            if on_circle and s.length() <= 9.0:
                log.append("arcs: chord segment absorbed by the refined arc")
                continue
            survivors.append(s)
        keep = survivors
        refined.append(out)
    return refined, keep, log


def fit_arcs(groups: list[np.ndarray]
             ) -> tuple[list[ArcWall], list[WorldSegment], list[str]]:
    """Arcs plus line fallbacks for every candidate group (world feet)."""
    arcs: list[ArcWall] = []
    fallback: list[WorldSegment] = []
    log: list[str] = []
    for k, group in enumerate(groups):
        try:
            geom = fit_arc(group)
        except (ArcRejected, CollinearPoints) as e:
            log.append(f"arcs: group {k} rejected ({e}); line fallback")
            fallback.extend(polyline_fallback(group))
            continue
        arcs.append(ArcWall(f"tmp_arc{k}", geom.center, geom.radius,
                            geom.start_angle, geom.sweep, geom.ccw))
    return arcs, fallback, log
