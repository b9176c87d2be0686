import itertools
import math

import numpy as np
import pytest

from planforge import evalharness as EH
from planforge.geometry import (ArcWall, Layout, LineWall, Opening, Point2,
                                wall_midpoint)


# ---------------------------------------------------------------------------
# ID normalization
# ---------------------------------------------------------------------------

def test_normalize_id():
    assert EH.normalize_id("d02") == ("door", 2)
    assert EH.normalize_id("d2") == ("door", 2)
    assert EH.normalize_id("Wall 7") == ("wall", 7)
    assert EH.normalize_id("win11") == ("window", 11)
    assert EH.normalize_id("win11") != EH.normalize_id("win15")
    assert EH.normalize_id("W_3") == ("window", 3)
    with pytest.raises(EH.Unclassifiable):
        EH.normalize_id("room4x")
    with pytest.raises(EH.Unclassifiable):
        EH.normalize_id("")


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------

def _simple_gt(median_wall=12.0):
    walls = [LineWall(f"wall{i+1}", Point2(0, 2.0 * i),
                      Point2(median_wall, 2.0 * i)) for i in range(3)]
    doors = [Opening("door1", "door", "wall1", 6.0, 3.0, 7.0)]
    return Layout(walls=walls, doors=doors)


def test_derive_gates_scaling():
    gates = EH.derive_gates(_simple_gt(12.0))
    assert abs(gates["walls"].midpoint_max - 3.0) < 1e-9
    doubled = EH.derive_gates(_simple_gt(24.0))
    assert abs(doubled["walls"].midpoint_max - 6.0) < 1e-9
    assert "windows" not in gates  # empty category: unset


def test_empty_category_scores():
    gt = _simple_gt()
    pred = _simple_gt()
    rep = EH.evaluate(pred, gt)
    wm = rep.categories["windows"]
    assert (wm.tp, wm.fp, wm.fn) == (0, 0, 0)
    assert wm.precision == 1.0 and wm.recall == 1.0


# ---------------------------------------------------------------------------
# Hungarian assignment
# ---------------------------------------------------------------------------

def brute_force_best(cost: np.ndarray) -> float:
    n, m = cost.shape
    if n <= m:
        perms = itertools.permutations(range(m), n)
        return min(sum(cost[i, p[i]] for i in range(n)) for p in perms)
    perms = itertools.permutations(range(n), m)
    return min(sum(cost[p[j], j] for j in range(m)) for p in perms)


def test_hungarian_known_case():
    cost = np.array([[1.0, 2, 3], [2, 4, 6], [3, 6, 9]])
    pairs = EH.hungarian_assign(cost)
    assert dict(pairs) == {0: 2, 1: 1, 2: 0}
    assert sum(cost[i, j] for i, j in pairs) == 10.0


def test_hungarian_identity_dominant():
    cost = np.full((4, 4), 10.0)
    np.fill_diagonal(cost, 0.1)
    assert dict(EH.hungarian_assign(cost)) == {i: i for i in range(4)}


def test_hungarian_all_blocked():
    cost = np.full((3, 3), np.inf)
    assert EH.hungarian_assign(cost) == []


def test_hungarian_matches_brute_force_sample():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n, m = rng.integers(1, 7, size=2)
        cost = rng.uniform(0, 1, size=(n, m))
        pairs = EH.hungarian_assign(cost)
        assert len(pairs) == min(n, m)
        total = sum(cost[i, j] for i, j in pairs)
        assert total == pytest.approx(brute_force_best(cost), abs=0)


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------

def square_gt():
    walls = [
        LineWall("wall1", Point2(0, 10), Point2(0, 0)),
        LineWall("wall2", Point2(0, 0), Point2(12, 0)),
        LineWall("wall3", Point2(12, 0), Point2(12, 10)),
        LineWall("wall4", Point2(12, 10), Point2(0, 10)),
    ]
    doors = [Opening("door2", "door", "wall2", 6.0, 3.0, 7.0)]
    return Layout(walls=walls, doors=doors)


def test_id_first_pairing():
    gt = square_gt()
    pred = square_gt()
    pred.doors[0] = Opening("d2", "door", "wall2", 6.1, 3.0, 7.0)
    m = EH.pair_elements(pred, gt)["doors"]
    assert m.pairs and m.pairs[0][:2] == ("d2", "door2")


def test_orientation_gate_excludes():
    gt = square_gt()
    pred = square_gt()
    # rotate wall2 by 20 degrees about its midpoint
    w = pred.walls[1]
    mid = wall_midpoint(w)
    ang = math.radians(20)
    def rot(p):
        dx, dy = p.x - mid.x, p.y - mid.y
        return Point2(mid.x + dx * math.cos(ang) - dy * math.sin(ang),
                      mid.y + dx * math.sin(ang) + dy * math.cos(ang))
    pred.walls[1] = LineWall("wall2", rot(w.start), rot(w.end))
    m = EH.pair_elements(pred, gt)["walls"]
    assert "wall2" in m.unmatched_pred
    assert "wall2" in m.unmatched_gt


def test_one_to_one_extra_pred_is_fp():
    gt = square_gt()
    pred = square_gt()
    pred.walls.append(LineWall("wall9", Point2(0, 0.3), Point2(12, 0.3)))
    m = EH.pair_elements(pred, gt)["walls"]
    assert len(m.pairs) == 4
    assert len(m.unmatched_pred) == 1
    # brute check: the exact-overlay wall wins the GT wall
    paired_for_wall2 = [p for p, g, _ in m.pairs if g == "wall2"]
    assert paired_for_wall2 == ["wall2"]


def test_arc_radius_gate():
    def arc_layout(radius):
        arc = ArcWall("wall1", Point2(0, 0), radius, 0.0, math.pi / 2, True)
        return Layout(walls=[arc])
    gt = arc_layout(10.0)
    assert EH.pair_elements(arc_layout(10.5), gt)["walls"].pairs  # 5% off: ok
    assert not EH.pair_elements(arc_layout(13.0), gt)["walls"].pairs  # 30%: out


def test_line_never_pairs_arc():
    gt = Layout(walls=[ArcWall("wall1", Point2(0, 5), 5.0, -math.pi / 2,
                               math.pi, True)])
    pred = Layout(walls=[LineWall("wall1", Point2(5, 0), Point2(5, 10))])
    assert not EH.pair_elements(pred, gt)["walls"].pairs


# ---------------------------------------------------------------------------
# Metric arithmetic
# ---------------------------------------------------------------------------

def test_detection_metric_values():
    p, r, f1 = EH.detection_metrics(5, 0, 1)
    assert p == 1.0
    assert abs(r - 0.8333) < 1e-4
    assert abs(f1 - 0.9091) < 1e-4
    assert EH.detection_metrics(0, 2, 3) == (0.0, 0.0, 0.0)
    assert EH.detection_metrics(7, 0, 0) == (1.0, 1.0, 1.0)


def test_rmse_mae_hand_values():
    # RMSE over dL = {3, 4} and MAE over {1, 2, 3} via a constructed matching
    gt = Layout(walls=[LineWall("wall1", Point2(0, 0), Point2(10, 0)),
                       LineWall("wall2", Point2(0, 5), Point2(10, 5)),
                       LineWall("wall3", Point2(0, 10), Point2(10, 10))])
    pred = Layout(walls=[LineWall("wall1", Point2(0, 1), Point2(13, 1)),
                         LineWall("wall2", Point2(0, 3), Point2(14, 3)),
                         LineWall("wall3", Point2(-1.5, 13),
                                  Point2(11.5, 13))])
    # dL = {3, 4, 3}; midpoint shifts = {sqrt(1.5^2+1), sqrt(2^2+4), 3}
    m = EH.Matching("walls", [("wall1", "wall1", 0.0), ("wall2", "wall2", 0.0)],
                    [], [])
    rmse, mae, empty = EH.geometry_metrics(m, pred, gt)
    assert abs(rmse - 3.5355) < 1e-4
    assert not empty
    m2 = EH.Matching("walls", [("wall1", "wall1", 0.0)], [], [])
    pred2 = Layout(walls=[LineWall("wall1", Point2(0, 1), Point2(10, 1))])
    rmse2, mae2, _ = EH.geometry_metrics(m2, pred2, gt)
    assert abs(mae2 - 1.0) < 1e-9


def test_identical_layouts_zero_error():
    gt = square_gt()
    rep = EH.evaluate(square_gt(), gt)
    for cat in ("walls", "doors"):
        cm = rep.categories[cat]
        assert cm.f1 == 1.0
        assert cm.rmse_length == 0.0
        assert cm.mae_midpoint == 0.0


def test_micro_f1_between_min_max():
    gt = square_gt()
    pred = square_gt()
    pred.doors[0] = Opening("door2", "door", "wall2", 9.0, 3.0, 7.0)  # 3 ft off
    rep = EH.evaluate(pred, gt)
    f1s = [rep.categories["walls"].f1, rep.categories["doors"].f1]
    assert min(f1s) - 1e-9 <= rep.overall.f1 <= max(f1s) + 1e-9


def test_permutation_invariance():
    gt = square_gt()
    pred = square_gt()
    rep1 = EH.evaluate(pred, gt)
    pred.walls.reverse()
    rep2 = EH.evaluate(pred, gt)
    assert rep1.to_doc() == rep2.to_doc()


def test_score_session_final_row_zero_delta():
    gt = square_gt()
    drift = square_gt()
    drift.doors[0] = Opening("door2", "door", "wall2", 6.6, 3.0, 7.0)
    trace = EH.score_session([drift, square_gt()], gt)
    final_rows = [r for r in trace.rows if r.iteration == 1]
    assert all(abs(r.d_f1) < 1e-12 and abs(r.d_rmse) < 1e-12 for r in final_rows)
    last = trace.by_iteration("overall")[-1]
    assert last.metrics.f1 == 1.0
    assert last.metrics.rmse_length == 0.0
    csv_text = trace.to_csv()
    assert csv_text.splitlines()[0].startswith("iteration,category,tp")
    with pytest.raises(EH.EmptyLog):
        EH.score_session([], gt)
