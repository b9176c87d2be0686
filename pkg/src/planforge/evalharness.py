"""Gated one-to-one element pairing and detection/fidelity metrics.

Pairing is strictly within category (walls, doors, windows): ID-first after
normalization, then minimum-cost assignment on a square-extended matrix under
hard geometric gates. Metrics: precision/recall/F1 per category plus a
micro-averaged overall, and RMSE of length / MAE of midpoint over matched
pairs. Session scoring replays layout snapshots and reports per-iteration
deltas against the final row.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import constants as C
from .geometry import (ArcWall, Layout, LineWall, Opening, Point2, Wall,
                       wall_length, wall_midpoint, wall_orientation,
                       wall_point_at)

CATEGORIES = ("walls", "doors", "windows")

_SENTINEL = 1.0e6       # square-extension dummy cost
_BLOCKED = 1.0e7        # gate-failing pair cost (never preferred over a dummy)


class Unclassifiable(ValueError):
    pass


class EmptyLog(ValueError):
    pass


def normalize_id(raw: str) -> tuple[str, int]:
    """Lowercase, strip spaces/underscores, resolve class aliases, parse the
    numeric suffix with leading zeros dropped."""
    if not raw or not raw.strip():
        raise Unclassifiable("empty id")
    s = re.sub(r"[\s_\-]+", "", raw.strip().lower())
    m = re.fullmatch(r"([a-z]+)0*(\d+)", s)
    if not m:
        raise Unclassifiable(f"no class/index in {raw!r}")
    alias = {"d": "door", "door": "door",
             "w": "window", "win": "window", "window": "window",
             "wall": "wall"}
    cls = alias.get(m.group(1))
    if cls is None:
        raise Unclassifiable(f"unknown class token in {raw!r}")
    return (cls, int(m.group(2)))


@dataclass
class CategoryGates:
    orientation_max: float      # radians; line walls only
    midpoint_max: float         # feet
    length_ratio_max: float
    radius_ratio_max: float     # arcs


class EmptyCategory(ValueError):
    pass


def _category_elements(layout: Layout, category: str):
    if category == "walls":
        return list(layout.walls)
    if category == "doors":
        return list(layout.doors)
    return list(layout.windows)


def _element_length(layout: Layout, el) -> float:
    if isinstance(el, (LineWall, ArcWall)):
        return wall_length(el)
    host = layout.wall_by_id(el.host)
    # span along the host wall equals the opening width
    return el.width if host is not None else el.width


def _element_midpoint(layout: Layout, el) -> Point2 | None:
    if isinstance(el, (LineWall, ArcWall)):
        return wall_midpoint(el)
    host = layout.wall_by_id(el.host)
    if host is None:
        return None
    length = wall_length(host)
    off = min(max(el.offset, 0.0), length)
    return wall_point_at(host, off)


def derive_gates(gt: Layout) -> dict[str, CategoryGates]:
    """Gates proportional to GT statistics; empty categories stay ungated."""
    gates: dict[str, CategoryGates] = {}
    for cat in CATEGORIES:
        elements = _category_elements(gt, cat)
        if not elements:
            continue
        lengths = sorted(_element_length(gt, e) for e in elements)
        median = lengths[len(lengths) // 2] if len(lengths) % 2 == 1 else (
            (lengths[len(lengths) // 2 - 1] + lengths[len(lengths) // 2]) / 2.0)
        gates[cat] = CategoryGates(
            orientation_max=math.radians(C.GATE_ORIENTATION_DEG),
            midpoint_max=C.GATE_MIDPOINT_MEDIAN_FACTOR * median,
            length_ratio_max=C.GATE_LENGTH_RATIO,
            radius_ratio_max=C.GATE_RADIUS_RATIO,
        )
    return gates


def hungarian_assign(cost: np.ndarray) -> list[tuple[int, int]]:
    """Minimum-total-cost one-to-one assignment on the square-extended matrix.

    Infinite entries mark gate-failing pairs; rows/columns assigned to the
    dummy extension (or to a blocked pair) come back unmatched.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.size == 0:
        return []
    n, m = cost.shape
    size = n + m
    square = np.full((size, size), _SENTINEL, dtype=float)
    real = np.where(np.isfinite(cost), cost, _BLOCKED)
    square[:n, :m] = real
    square[n:, m:] = 0.0
    rows, cols = linear_sum_assignment(square)
    pairs = []
    for r, c in zip(rows, cols):
        if r < n and c < m and np.isfinite(cost[r, c]):
            pairs.append((int(r), int(c)))
    return pairs


@dataclass
class Matching:
    category: str
    pairs: list[tuple[str, str, float]]
    unmatched_pred: list[str]
    unmatched_gt: list[str]


def _gate_pair(pred_lay: Layout, gt_lay: Layout, p, g,
               gates: CategoryGates) -> float | None:
    """Cost if the pair passes every gate, else None."""
    mp = _element_midpoint(pred_lay, p)
    mg = _element_midpoint(gt_lay, g)
    if mp is None or mg is None:
        return None
    dist = mp.dist(mg)
    if dist > gates.midpoint_max + 1e-9:
        return None
    lp = _element_length(pred_lay, p)
    lg = _element_length(gt_lay, g)
    if lg <= 1e-9:
        return None
    ratio = abs(lp - lg) / lg
    if ratio > gates.length_ratio_max + 1e-9:
        return None
    cost = (C.COST_WEIGHTS[0] * dist / max(gates.midpoint_max, 1e-9)
            + C.COST_WEIGHTS[1] * ratio)
    wall_like = isinstance(p, (LineWall, ArcWall))
    if wall_like:
        if isinstance(p, LineWall) != isinstance(g, LineWall):
            return None  # line vs arc: radius consistency unsatisfiable
        if isinstance(p, LineWall):
            dori = abs(wall_orientation(p) - wall_orientation(g))
            dori = min(dori, math.pi - dori)
            if dori > gates.orientation_max + 1e-9:
                return None
            cost += C.COST_WEIGHTS[2] * dori / max(gates.orientation_max, 1e-9)
        else:
            rr = abs(p.radius - g.radius) / max(g.radius, 1e-9)
            if rr > gates.radius_ratio_max + 1e-9:
                return None
            cost += C.COST_WEIGHTS[2] * rr / max(gates.radius_ratio_max, 1e-9)
    return cost


def pair_elements(pred: Layout, gt: Layout) -> dict[str, Matching]:
    """Per-category one-to-one matchings, ID-first then gated assignment."""
    gates_by_cat = derive_gates(gt)
    wall_matching = _pair_category(pred, gt, "walls", gates_by_cat.get("walls"),
                                   wall_map=None)
    wall_map = {p: g for p, g, _ in wall_matching.pairs}
    out = {"walls": wall_matching}
    for cat in ("doors", "windows"):
        out[cat] = _pair_category(pred, gt, cat, gates_by_cat.get(cat),
                                  wall_map=wall_map)
    return out


def _nearest_wall_id(layout: Layout, point: Point2) -> str | None:
    best, best_d = None, math.inf
    for w in layout.walls:
        length = wall_length(w)
        if length <= 1e-9:
            continue
        lo = 0.0
        # project by sampling (exact for lines, fine-grained for arcs)
        if isinstance(w, LineWall):
            ux = (w.end.x - w.start.x) / length
            uy = (w.end.y - w.start.y) / length
            s = (point.x - w.start.x) * ux + (point.y - w.start.y) * uy
            s = min(max(s, lo), length)
            d = wall_point_at(w, s).dist(point)
        else:
            d = abs(point.dist(w.center) - w.radius)
            ang = math.atan2(point.y - w.center.y, point.x - w.center.x)
            rel = (ang - w.start_angle) * (1.0 if w.ccw else -1.0)
            rel = rel % (2 * math.pi)
            if rel > w.sweep:
                d = min(point.dist(w.start), point.dist(w.end))
        if d < best_d:
            best, best_d = w.id, d
    return best


def _host_of(layout: Layout, opening: Opening) -> str | None:
    if layout.wall_by_id(opening.host) is not None:
        return opening.host
    mid = _element_midpoint(layout, opening)
    if mid is None:
        return None
    return _nearest_wall_id(layout, mid)


def _pair_category(pred: Layout, gt: Layout, category: str,
                   gates: CategoryGates | None,
                   wall_map: dict[str, str] | None) -> Matching:
    preds = _category_elements(pred, category)
    gts = _category_elements(gt, category)
    if gates is None or not preds or not gts:
        return Matching(category, [],
                        [p.id for p in preds], [g.id for g in gts])

    pairs: list[tuple[str, str, float]] = []
    used_p: set[int] = set()
    used_g: set[int] = set()

    # ID-first: bind unique normalized-id matches that pass the gates
    def norm_or_none(eid):
        try:
            return normalize_id(eid)
        except Unclassifiable:
            return None

    pred_keys = [norm_or_none(p.id) for p in preds]
    gt_keys = [norm_or_none(g.id) for g in gts]
    for i, pk in enumerate(pred_keys):
        if pk is None:
            continue
        hits = [j for j, gk in enumerate(gt_keys) if gk == pk]
        same_pred = [i2 for i2, pk2 in enumerate(pred_keys) if pk2 == pk]
        if len(hits) == 1 and len(same_pred) == 1:
            j = hits[0]
            cost = _gate_pair(pred, gt, preds[i], gts[j], gates)
            if cost is not None:
                cost = _with_host_penalty(pred, gt, preds[i], gts[j], cost, wall_map)
                pairs.append((preds[i].id, gts[j].id, cost))
                used_p.add(i)
                used_g.add(j)

    # geometric fallback on the remainder
    rem_p = [i for i in range(len(preds)) if i not in used_p]
    rem_g = [j for j in range(len(gts)) if j not in used_g]
    if rem_p and rem_g:
        cost = np.full((len(rem_p), len(rem_g)), np.inf)
        for a, i in enumerate(rem_p):
            for b, j in enumerate(rem_g):
                c = _gate_pair(pred, gt, preds[i], gts[j], gates)
                if c is not None:
                    cost[a, b] = _with_host_penalty(pred, gt, preds[i], gts[j],
                                                    c, wall_map)
        for a, b in hungarian_assign(cost):
            i, j = rem_p[a], rem_g[b]
            pairs.append((preds[i].id, gts[j].id, float(cost[a, b])))
            used_p.add(i)
            used_g.add(j)

    return Matching(category, sorted(pairs),
                    sorted(preds[i].id for i in range(len(preds)) if i not in used_p),
                    sorted(gts[j].id for j in range(len(gts)) if j not in used_g))


def _with_host_penalty(pred: Layout, gt: Layout, p, g, cost: float,
                       wall_map: dict[str, str] | None) -> float:
    """Host-aware opening costs: penalize mapped-host disagreement."""
    if wall_map is None or not isinstance(p, Opening):
        return cost
    pred_host = _host_of(pred, p)
    gt_host = _host_of(gt, g)
    if pred_host is None or gt_host is None:
        return cost
    mapped = wall_map.get(pred_host)
    if mapped is None:
        # unmatched pred wall: fall back to nearest GT wall by projected midpoint
        mid = _element_midpoint(pred, p)
        mapped = _nearest_wall_id(gt, mid) if mid is not None else None
    if mapped is not None and mapped != gt_host:
        return cost + C.HOST_MISMATCH_PENALTY
    return cost


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass
class CategoryMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    rmse_length: float
    mae_midpoint: float
    empty: bool = False

    def to_doc(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall,
                "f1": self.f1, "rmse_length": self.rmse_length,
                "mae_midpoint": self.mae_midpoint, "empty": self.empty}


@dataclass
class MetricsReport:
    categories: dict[str, CategoryMetrics] = field(default_factory=dict)
    overall: CategoryMetrics | None = None

    def to_doc(self) -> dict:
        return {"categories": {k: v.to_doc() for k, v in self.categories.items()},
                "overall": self.overall.to_doc() if self.overall else None}


def detection_counts(matching: Matching) -> tuple[int, int, int]:
    return (len(matching.pairs), len(matching.unmatched_pred),
            len(matching.unmatched_gt))


def detection_metrics(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision/recall/F1 with explicit empty-denominator conventions."""
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else (
        2.0 * precision * recall / (precision + recall))
    return precision, recall, f1


def geometry_metrics(matching: Matching, pred: Layout,
                     gt: Layout) -> tuple[float, float, bool]:
    """(rmse_length, mae_midpoint, empty_flag) over matched pairs only."""
    if not matching.pairs:
        return 0.0, 0.0, True
    sq_sum = 0.0
    abs_sum = 0.0
    n = 0
    pred_idx = {e.id: e for e in _category_elements(pred, matching.category)}
    gt_idx = {e.id: e for e in _category_elements(gt, matching.category)}
    for pid, gid, _ in matching.pairs:
        p, g = pred_idx[pid], gt_idx[gid]
        dl = _element_length(pred, p) - _element_length(gt, g)
        mp = _element_midpoint(pred, p)
        mg = _element_midpoint(gt, g)
        if mp is None or mg is None:
            continue
        sq_sum += dl * dl
        abs_sum += mp.dist(mg)
        n += 1
    if n == 0:
        return 0.0, 0.0, True
    return math.sqrt(sq_sum / n), abs_sum / n, False


def evaluate(pred: Layout, gt: Layout) -> MetricsReport:
    matchings = pair_elements(pred, gt)
    report = MetricsReport()
    pooled_tp = pooled_fp = pooled_fn = 0
    pooled_sq = 0.0
    pooled_abs = 0.0
    pooled_n = 0
    for cat in CATEGORIES:
        m = matchings[cat]
        tp, fp, fn = detection_counts(m)
        precision, recall, f1 = detection_metrics(tp, fp, fn)
        rmse, mae, empty = geometry_metrics(m, pred, gt)
        report.categories[cat] = CategoryMetrics(tp, fp, fn, precision, recall,
                                                 f1, rmse, mae, empty)
        pooled_tp += tp
        pooled_fp += fp
        pooled_fn += fn
        if not empty:
            pooled_sq += rmse * rmse * tp
            pooled_abs += mae * tp
            pooled_n += tp
    precision, recall, f1 = detection_metrics(pooled_tp, pooled_fp, pooled_fn)
    rmse = math.sqrt(pooled_sq / pooled_n) if pooled_n else 0.0
    mae = pooled_abs / pooled_n if pooled_n else 0.0
    report.overall = CategoryMetrics(pooled_tp, pooled_fp, pooled_fn, precision,
                                     recall, f1, rmse, mae, pooled_n == 0)
    return report


# ---------------------------------------------------------------------------
# Iterative session scoring
# ---------------------------------------------------------------------------

@dataclass
class IterationRow:
    iteration: int
    category: str
    metrics: CategoryMetrics
    d_f1: float = 0.0
    d_rmse: float = 0.0
    d_mae: float = 0.0


@dataclass
class IterationTrace:
    rows: list[IterationRow]

    def by_iteration(self, category: str) -> list[IterationRow]:
        return [r for r in self.rows if r.category == category]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", "category", "tp", "fp", "fn", "precision",
                         "recall", "f1", "rmse", "mae", "d_f1", "d_rmse", "d_mae"])
        for r in self.rows:
            m = r.metrics
            writer.writerow([r.iteration, r.category, m.tp, m.fp, m.fn,
                             f"{m.precision:.6f}", f"{m.recall:.6f}",
                             f"{m.f1:.6f}", f"{m.rmse_length:.6f}",
                             f"{m.mae_midpoint:.6f}", f"{r.d_f1:.6f}",
                             f"{r.d_rmse:.6f}", f"{r.d_mae:.6f}"])
        return buf.getvalue()


def score_session(snapshots: list[Layout], gt: Layout) -> IterationTrace:
    """Per-iteration metrics plus deltas to the final iteration's values."""
    if not snapshots:
        raise EmptyLog("session log has no layout snapshots")
    reports = [evaluate(snap, gt) for snap in snapshots]
    final = reports[-1]
    rows: list[IterationRow] = []
    for i, rep in enumerate(reports):
        for cat in (*CATEGORIES, "overall"):
            cur = rep.overall if cat == "overall" else rep.categories[cat]
            fin = final.overall if cat == "overall" else final.categories[cat]
            rows.append(IterationRow(
                i, cat, cur,
                d_f1=cur.f1 - fin.f1,
                d_rmse=cur.rmse_length - fin.rmse_length,
                d_mae=cur.mae_midpoint - fin.mae_midpoint))
    return IterationTrace(rows)
