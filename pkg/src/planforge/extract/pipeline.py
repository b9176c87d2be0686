"""End-to-end extraction: SketchBundle -> initial layout + summary + stage log.

Pipeline: binarize -> deskew -> scale -> segments -> orientation clustering ->
merge -> weld/node -> stubs -> arcs -> openings -> rooms -> canonical ids ->
validation. Deterministic for a given bundle and parameter set (fixed RNG
seed); pixel input is y-down and flipped once at ingest.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .. import constants as C
from ..geometry import (ArcWall, Layout, LineWall, Point2, Wall,
                        assign_canonical_ids, sample_arc, wall_length)
from ..validate import validate
from . import arcs as arcs_mod
from . import raster as raster_mod
from . import rooms as rooms_mod
from .openings import LabelMark, place_openings
from .orient import cluster_orientations
from .scale import NoScaleAnnotation, WorldTransform, estimate_scale
from .segments import (WorldSegment, merge_segments, node_and_build_walls,
                       retain_stubs, weld_arc_tips, weld_corners)

DEFAULT_SEED = 20240611


class ExtractionError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@dataclass
class DimensionCallout:
    p1: tuple[float, float]   # pixel points, y-down as drawn
    p2: tuple[float, float]
    length: float             # feet


@dataclass
class SketchBundle:
    raster: np.ndarray | None = None                  # grayscale, y-down rows
    strokes: list[list[tuple[float, float]]] = field(default_factory=list)
    callouts: list[DimensionCallout] = field(default_factory=list)
    labels: list[dict] = field(default_factory=list)  # {p, class, width_hint?}
    swings: list[list[tuple[float, float]]] = field(default_factory=list)

    def digest(self) -> str:
        return hashlib.sha256(dumps_bundle(self).encode()).hexdigest()


def dumps_bundle(bundle: SketchBundle) -> str:
    doc: dict = {}
    if bundle.raster is not None:
        h, w = bundle.raster.shape
        pgm = b"P5\n%d %d\n255\n" % (w, h) + bundle.raster.astype(np.uint8).tobytes()
        doc["raster"] = {"width": w, "height": h, "encoding": "pgm-p5-base64",
                         "data": base64.b64encode(pgm).decode()}
    if bundle.strokes:
        doc["strokes"] = [[[float(x), float(y)] for x, y in poly]
                          for poly in bundle.strokes]
    doc["callouts"] = [{"p1": [c.p1[0], c.p1[1]], "p2": [c.p2[0], c.p2[1]],
                        "length": c.length} for c in bundle.callouts]
    doc["labels"] = bundle.labels
    doc["swings"] = [[[float(x), float(y)] for x, y in poly]
                     for poly in bundle.swings]
    return json.dumps(doc, separators=(",", ":")) + "\n"


def loads_bundle(text: str) -> SketchBundle:
    doc = json.loads(text)
    bundle = SketchBundle()
    if "raster" in doc:
        meta = doc["raster"]
        if meta.get("encoding") != "pgm-p5-base64":
            raise ValueError(f"unsupported raster encoding {meta.get('encoding')!r}")
        blob = base64.b64decode(meta["data"])
        header_end = blob.index(b"255\n") + 4
        pixels = np.frombuffer(blob[header_end:], dtype=np.uint8)
        bundle.raster = pixels.reshape(meta["height"], meta["width"]).copy()
    bundle.strokes = [[(float(x), float(y)) for x, y in poly]
                      for poly in doc.get("strokes", [])]
    bundle.callouts = [DimensionCallout((c["p1"][0], c["p1"][1]),
                                        (c["p2"][0], c["p2"][1]),
                                        float(c["length"]))
                       for c in doc.get("callouts", [])]
    bundle.labels = doc.get("labels", [])
    bundle.swings = [[(float(x), float(y)) for x, y in poly]
                     for poly in doc.get("swings", [])]
    if bundle.raster is None and not bundle.strokes:
        raise ValueError("bundle needs a raster or strokes source")
    return bundle


# ---------------------------------------------------------------------------
# Stroke-source segmentation
# ---------------------------------------------------------------------------

def _strokes_to_segments(strokes: list[list[tuple[float, float]]],
                         corner_deg: float = 10.0
                         ) -> tuple[list[raster_mod.PixelSegment], np.ndarray]:
    """Split polylines at corners; curved sub-runs go to the leftover pool."""
    segments: list[raster_mod.PixelSegment] = []
    leftover: list[np.ndarray] = []
    for poly in strokes:
        if len(poly) < 2:
            continue
        pts = np.asarray(poly, dtype=float)
        cuts = [0]
        for i in range(1, len(pts) - 1):
            v1 = pts[i] - pts[i - 1]
            v2 = pts[i + 1] - pts[i]
            n1, n2 = np.hypot(*v1), np.hypot(*v2)
            if n1 < 1e-9 or n2 < 1e-9:
                continue
            ang = math.degrees(math.acos(
                float(np.clip(np.dot(v1, v2) / (n1 * n2), -1, 1))))
            if ang > corner_deg:
                cuts.append(i)
        cuts.append(len(pts) - 1)
        for a, b in zip(cuts, cuts[1:]):
            run = pts[a:b + 1]
            if len(run) < 2:
                continue
            chord = np.hypot(*(run[-1] - run[0]))
            if chord < 1e-9:
                continue
            d = np.abs(np.cross(run[-1] - run[0], run - run[0])) / chord
            if float(d.max()) <= raster_mod.C.RANSAC_BAND_PX:
                segments.append(raster_mod.PixelSegment(
                    tuple(run[0]), tuple(run[-1]), len(run)))
            else:
                leftover.append(run)
    left = np.vstack(leftover) if leftover else np.empty((0, 2))
    return segments, left


# ---------------------------------------------------------------------------
# Main pipeline
# ---------------------------------------------------------------------------

def extract_layout(bundle: SketchBundle,
                   assume_scale: float | None = None,
                   support_min: int = C.HOUGH_SUPPORT_MIN,
                   rng_seed: int = DEFAULT_SEED
                   ) -> tuple[Layout, str, dict]:
    """Full Phase-1 extraction. Returns (layout, summary_text, stage_log)."""
    log: dict = {"stages": [], "warnings": []}

    def stage(name: str, **info):
        log["stages"].append({"stage": name, **info})

    rng = np.random.default_rng(rng_seed)

    # -- source pixels (flip y once: world y up) --
    try:
        if bundle.raster is not None:
            ink = raster_mod.binarize(bundle.raster)
            height = bundle.raster.shape[0]
            strokes_up = None
            stage("binarize", ink_pixels=int(len(ink)))
        elif bundle.strokes:
            ys = [y for poly in bundle.strokes for _, y in poly]
            height = int(math.ceil(max(ys))) + 1 if ys else 1
            strokes_up = [[(x, height - 1 - y) for x, y in poly]
                          for poly in bundle.strokes]
            ink = None
            stage("binarize", skipped=True, strokes=len(bundle.strokes))
        else:
            raise raster_mod.EmptyImage("bundle has no source")
    except raster_mod.EmptyImage as e:
        raise ExtractionError("binarize", e)

    def flip(p: tuple[float, float]) -> tuple[float, float]:
        return (p[0], height - 1 - p[1])

    # -- deskew --
    try:
        if ink is not None:
            phi, warn = raster_mod.estimate_skew(ink, support_min)
        else:
            phi, warn = raster_mod.skew_from_strokes(strokes_up)
        log["warnings"].extend(warn)
        stage("deskew", phi_deg=round(math.degrees(phi), 3))
    except Exception as e:
        raise ExtractionError("deskew", e)

    # -- scale --
    try:
        callouts = [{"p1": flip(c.p1), "p2": flip(c.p2), "length": c.length}
                    for c in bundle.callouts]
        sx, sy = estimate_scale(callouts, phi, assume_scale=assume_scale)
        stage("scale", sx=round(sx, 6), sy=round(sy, 6))
    except NoScaleAnnotation as e:
        raise ExtractionError("scale", e)
    transform = WorldTransform(phi, sx, sy)
    px_per_ft = 2.0 / (sx + sy)

    # -- segment detection (pixel space) --
    try:
        if ink is not None:
            px_segments, leftover = raster_mod.detect_segments(
                ink, rng, support_min=support_min, px_per_ft=px_per_ft)
        else:
            px_segments, leftover = _strokes_to_segments(strokes_up)
        stage("segments", count=len(px_segments),
              leftover_points=int(len(leftover)))
    except Exception as e:
        raise ExtractionError("segments", e)

    world_segments = [
        WorldSegment(Point2(*transform.apply(*s.a)),
                     Point2(*transform.apply(*s.b)), s.support)
        for s in px_segments]
    world_leftover = (transform.apply_many(leftover)
                      if len(leftover) else np.empty((0, 2)))

    # -- orientation clustering --
    try:
        if world_segments:
            model = cluster_orientations([s.angle() for s in world_segments],
                                         [s.length() for s in world_segments])
            stage("orientations", k=model.k,
                  means_deg=[round(math.degrees(m), 2) for m in model.means],
                  bic=round(model.bic, 2), aic=round(model.aic, 2))
        else:
            model = None
            stage("orientations", k=0)
    except Exception as e:
        raise ExtractionError("orientations", e)

    # -- merge --
    merged = merge_segments(world_segments, model)
    merged = [s for s in merged if s.length() >= 0.5]
    stage("merge", count=len(merged))

    # -- arcs: chord chains first, then unexplained ink --
    merged, arcs, chain_log = arcs_mod.chains_to_arcs(merged)
    log["warnings"].extend(chain_log)
    if len(world_leftover):
        min_group = max(20, int(2.0 * px_per_ft))
        groups = arcs_mod.group_points(world_leftover,
                                       link_dist=4.0 / px_per_ft,
                                       min_size=min_group)
        pool_arcs, fallback, arc_log = arcs_mod.fit_arcs(groups)
        arcs.extend(pool_arcs)
        log["warnings"].extend(arc_log)
        if fallback:
            merged = merge_segments(merged + fallback, model)
    if arcs:
        if ink is not None:
            all_ink_world = transform.apply_many(ink)
        else:
            pts = np.array([[x, y] for poly in strokes_up for x, y in poly])
            all_ink_world = transform.apply_many(pts) if len(pts) else pts
        arcs, merged, refine_log = arcs_mod.refine_arcs_with_ink(
            arcs, merged, all_ink_world)
        log["warnings"].extend(refine_log)
    stage("arcs", count=len(arcs))

    # -- weld, node, stubs --
    try:
        welded = weld_corners(merged)
        arcs = weld_arc_tips(welded, arcs)
        walls = node_and_build_walls(welded, arcs)
        walls, stub_log = retain_stubs(walls)
        log["warnings"].extend(stub_log)
        stage("walls", count=len(walls))
    except Exception as e:
        raise ExtractionError("walls", e)

    # -- translate to a canonical origin (bbox min corner) --
    min_x, min_y = _walls_bbox_min(walls)
    shift = Point2(-min_x, -min_y)
    walls = [_shift_wall(w, shift) for w in walls]

    def to_world(p: tuple[float, float]) -> Point2:
        x, y = transform.apply(*flip(p))
        return Point2(x + shift.x, y + shift.y)

    # -- openings --
    labels = []
    for entry in bundle.labels:
        cls = entry.get("class")
        if cls not in ("door", "window", "room"):
            log["warnings"].append(f"openings: unknown label class {cls!r}")
            continue
        labels.append(LabelMark(to_world(tuple(entry["p"])), cls,
                                entry.get("width_hint")))
    swings_world = [[to_world(p) for p in poly] for poly in bundle.swings]
    openings, opening_log = place_openings(labels, swings_world, walls)
    log["warnings"].extend(opening_log)
    stage("openings", doors=sum(1 for o in openings if o.cls == "door"),
          windows=sum(1 for o in openings if o.cls == "window"))

    # -- rooms --
    try:
        rooms, room_log = rooms_mod.extract_rooms(walls)
        log["warnings"].extend(room_log)
        stage("rooms", count=len(rooms))
    except rooms_mod.NoBoundedFace as e:
        raise ExtractionError("rooms", e)

    # -- assemble, round, canonicalize --
    layout = Layout(walls=walls,
                    doors=[o for o in openings if o.cls == "door"],
                    windows=[o for o in openings if o.cls == "window"],
                    rooms=rooms)
    _round_layout(layout)
    layout = assign_canonical_ids(layout)

    report = validate(layout)
    if not report.passes:
        log["warnings"].extend(
            f"validate: {v.code} {v.elements}" for v in report.violations)
    stage("validate", passes=report.passes,
          violations=len(report.violations))

    summary = _summary_text(layout)
    log["summary"] = summary
    return layout, summary, log


def _walls_bbox_min(walls: list[Wall]) -> tuple[float, float]:
    xs: list[float] = []
    ys: list[float] = []
    for w in walls:
        if isinstance(w, LineWall):
            xs += [w.start.x, w.end.x]
            ys += [w.start.y, w.end.y]
        else:
            for p in sample_arc(w, 0.05):
                xs.append(p.x)
                ys.append(p.y)
    if not xs:
        return (0.0, 0.0)
    return (min(xs), min(ys))


def _shift_wall(w: Wall, d: Point2) -> Wall:
    if isinstance(w, LineWall):
        return LineWall(w.id, w.start + d, w.end + d, w.thickness, w.height)
    return ArcWall(w.id, w.center + d, w.radius, w.start_angle, w.sweep,
                   w.ccw, w.thickness, w.height)


def _round_layout(layout: Layout):
    def r(x):
        return round(x, C.COORD_DECIMALS)
    for i, w in enumerate(layout.walls):
        if isinstance(w, LineWall):
            layout.walls[i] = LineWall(w.id, Point2(r(w.start.x), r(w.start.y)),
                                       Point2(r(w.end.x), r(w.end.y)),
                                       r(w.thickness), r(w.height))
        else:
            layout.walls[i] = ArcWall(w.id, Point2(r(w.center.x), r(w.center.y)),
                                      r(w.radius),
                                      round(w.start_angle, C.ANGLE_DECIMALS),
                                      round(w.sweep, C.ANGLE_DECIMALS), w.ccw,
                                      r(w.thickness), r(w.height))
    for o in layout.openings():
        o.offset, o.width, o.height = r(o.offset), r(o.width), r(o.height)
        if o.sill is not None:
            o.sill = r(o.sill)
    for room in layout.rooms:
        room.polygon = [Point2(r(p.x), r(p.y)) for p in room.polygon]


def _summary_text(layout: Layout) -> str:
    """Deterministic plain-text summary: counts, adjacency, proportions."""
    xs: list[float] = []
    ys: list[float] = []
    for w in layout.walls:
        pts = ([w.start, w.end] if isinstance(w, LineWall)
               else sample_arc(w, 0.05))
        xs += [p.x for p in pts]
        ys += [p.y for p in pts]
    width = max(xs) - min(xs) if xs else 0.0
    depth = max(ys) - min(ys) if ys else 0.0
    adjacency = []
    for i, w1 in enumerate(layout.walls):
        for w2 in layout.walls[i + 1:]:
            ends1 = (w1.start, w1.end)
            ends2 = (w2.start, w2.end)
            if any(p.dist(q) <= C.CONNECT_TOL for p in ends1 for q in ends2):
                adjacency.append(f"{w1.id}-{w2.id}")
    lines = [
        f"elements: {len(layout.walls)} walls, {len(layout.doors)} doors, "
        f"{len(layout.windows)} windows, {len(layout.rooms)} rooms",
        f"bounding box: {width:.1f} x {depth:.1f} ft "
        f"(aspect {width / depth:.2f})" if depth > 0 else
        f"bounding box: {width:.1f} x {depth:.1f} ft",
        "adjacency: " + (", ".join(sorted(adjacency)) if adjacency else "none"),
        "arc walls: " + (", ".join(sorted(w.id for w in layout.walls
                                          if isinstance(w, ArcWall))) or "none"),
    ]
    return "\n".join(lines)


class ExtractionAgent:
    """Pluggable perception interface: bundle in, layout + summary out.

    The deterministic pipeline is the default implementation; an external
    model-backed agent can be swapped in behind the same signature.
    """

    def __init__(self, assume_scale: float | None = None,
                 support_min: int = C.HOUGH_SUPPORT_MIN,
                 rng_seed: int = DEFAULT_SEED):
        self.assume_scale = assume_scale
        self.support_min = support_min
        self.rng_seed = rng_seed

    def extract(self, bundle: SketchBundle) -> tuple[Layout, str, dict]:
        return extract_layout(bundle, assume_scale=self.assume_scale,
                              support_min=self.support_min,
                              rng_seed=self.rng_seed)
