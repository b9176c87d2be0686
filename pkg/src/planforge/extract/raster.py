"""Raster perception: binarization, Hough voting, segment extraction.

Coordinates are y-up pixel space throughout (callers flip raster rows once at
ingest). Voting uses a deterministic subsample of the ink (the probabilistic
part of the transform); extraction walks peaks with vote withdrawal so the
accumulator never has to be rebuilt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import constants as C


class EmptyImage(ValueError):
    pass


class NoDominantDirection(Warning):
    pass


@dataclass
class PixelSegment:
    a: tuple[float, float]
    b: tuple[float, float]
    support: int

    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def angle(self) -> float:
        return math.atan2(self.b[1] - self.a[1], self.b[0] - self.a[0]) % math.pi


def binarize(grid: np.ndarray) -> np.ndarray:
    """Otsu threshold; returns ink coordinates (x, y_up), shape (N, 2)."""
    grid = np.asarray(grid)
    if grid.size == 0:
        raise EmptyImage("empty grid")
    values = grid.astype(np.uint8).ravel()
    hist = np.bincount(values, minlength=256).astype(float)
    total = values.size
    omega = np.cumsum(hist)
    mu = np.cumsum(hist * np.arange(256))
    mu_t = mu[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma_b = (mu_t * omega - mu) ** 2 / (omega * (total - omega))
    sigma_b = np.nan_to_num(sigma_b, nan=0.0, posinf=0.0, neginf=0.0)
    threshold = int(np.argmax(sigma_b))
    rows, cols = np.nonzero(grid <= threshold)
    if rows.size == 0 or threshold == 0 and np.all(grid > 0):
        raise EmptyImage("no ink below adaptive threshold")
    if rows.size == 0:
        raise EmptyImage("no ink")
    height = grid.shape[0]
    ink = np.column_stack([cols.astype(float),
                           (height - 1 - rows).astype(float)])
    return ink


def _vote_subsample(ink: np.ndarray, cap: int = C.HOUGH_VOTE_CAP) -> np.ndarray:
    """Deterministic evenly-strided subsample of canonically sorted ink."""
    order = np.lexsort((ink[:, 1], ink[:, 0]))
    pts = ink[order]
    if len(pts) <= cap:
        return pts
    idx = np.linspace(0, len(pts) - 1, cap).astype(int)
    return pts[idx]


def _accumulate(pts: np.ndarray, thetas: np.ndarray,
                rho_bin: float) -> tuple[np.ndarray, float]:
    """Vote matrix A[theta, rho_bin]; returns (A, rho_offset)."""
    cos_t = np.cos(thetas)
    sin_t = np.sin(thetas)
    rho = pts[:, 0:1] * cos_t[None, :] + pts[:, 1:2] * sin_t[None, :]
    rho_min = rho.min() - rho_bin
    bins = ((rho - rho_min) / rho_bin).astype(np.int32)
    n_bins = bins.max() + 2
    acc = np.zeros((len(thetas), n_bins), dtype=np.int32)
    for t in range(len(thetas)):
        acc[t] = np.bincount(bins[:, t], minlength=n_bins)
    return acc, rho_min


def estimate_skew(ink: np.ndarray,
                  support_min: int = C.HOUGH_SUPPORT_MIN
                  ) -> tuple[float, list[str]]:
    """Dominant stroke direction folded into [-15, +15] degrees.

    Returns (phi_radians, warnings). Directions outside the fold range leave
    the plan untouched (phi = 0) so genuine diagonals are preserved.
    """
    warnings: list[str] = []
    pts = _vote_subsample(ink)
    thetas = np.radians(np.arange(0.0, 180.0, C.HOUGH_ANGLE_BIN_DEG))
    acc, _ = _accumulate(pts, thetas, C.HOUGH_RHO_BIN_PX)
    per_angle = acc.max(axis=1)
    best = int(np.argmax(per_angle))
    if per_angle[best] < support_min:
        warnings.append("skew: no dominant direction; assuming 0")
        return 0.0, warnings
    # fine pass: 0.05 degree bins within +-2 degrees of the coarse peak
    coarse = math.degrees(thetas[best])
    fine = np.radians(np.arange(coarse - 2.0, coarse + 2.0001, 0.05))
    acc_f, _ = _accumulate(pts, fine, C.HOUGH_RHO_BIN_PX)
    best_f = int(np.argmax(acc_f.max(axis=1)))
    theta_star = math.degrees(fine[best_f])
    direction = theta_star - 90.0  # line direction from its normal angle
    folded = (direction + 45.0) % 90.0 - 45.0
    if abs(folded) <= C.SKEW_FOLD_DEG:
        return math.radians(folded), warnings
    return 0.0, warnings


def skew_from_strokes(strokes: list[list[tuple[float, float]]]) -> tuple[float, list[str]]:
    """Length-weighted direction histogram (mod 90 degrees) for stroke input."""
    warnings: list[str] = []
    bins = np.zeros(360)  # 0.25 degree bins over [0, 90)
    for poly in strokes:
        for (x1, y1), (x2, y2) in zip(poly, poly[1:]):
            length = math.hypot(x2 - x1, y2 - y1)
            if length < 1e-9:
                continue
            ang = math.degrees(math.atan2(y2 - y1, x2 - x1)) % 90.0
            bins[int(ang / 0.25) % 360] += length
    if bins.max() <= 0:
        warnings.append("skew: no stroke directions; assuming 0")
        return 0.0, warnings
    peak = int(np.argmax(bins))
    # parabolic refinement over the circular neighbourhood
    prev = bins[(peak - 1) % 360]
    nxt = bins[(peak + 1) % 360]
    denom = prev - 2 * bins[peak] + nxt
    frac = 0.0 if abs(denom) < 1e-12 else 0.5 * (prev - nxt) / denom
    ang = (peak + frac) * 0.25
    folded = (ang + 45.0) % 90.0 - 45.0
    if abs(folded) <= C.SKEW_FOLD_DEG:
        return math.radians(folded), warnings
    return 0.0, warnings


def _kasa_circle(pts: np.ndarray) -> tuple[float, float, float] | None:
    """Algebraic circle fit; returns (cx, cy, r) or None."""
    if len(pts) < 3:
        return None
    x, y = pts[:, 0], pts[:, 1]
    A = np.column_stack([x, y, np.ones(len(pts))])
    b = x * x + y * y
    try:
        sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    except np.linalg.LinAlgError:
        return None
    cx, cy = sol[0] / 2.0, sol[1] / 2.0
    r2 = sol[2] + cx * cx + cy * cy
    if r2 <= 0:
        return None
    return cx, cy, math.sqrt(r2)


def _tls_line(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Total-least-squares line: (point_on_line, unit_direction)."""
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return centroid, vt[0]


def detect_segments(ink: np.ndarray, rng: np.random.Generator,
                    support_min: int = C.HOUGH_SUPPORT_MIN,
                    px_per_ft: float = 10.0,
                    ) -> tuple[list[PixelSegment], np.ndarray]:
    """Probabilistic-Hough candidates refined by RANSAC, split at junctions.

    Returns (segments, leftover_points). Runs with systematic curvature are
    vetoed and left in the leftover pool for arc fitting.
    """
    remaining = ink.copy()
    votes = _vote_subsample(remaining)
    if len(votes) > C.HOUGH_VOTE_CAP:
        votes = votes[rng.choice(len(votes), C.HOUGH_VOTE_CAP, replace=False)]
    thetas = np.radians(np.arange(0.0, 180.0, C.HOUGH_ANGLE_BIN_DEG))
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    acc, rho_min = _accumulate(votes, thetas, C.HOUGH_RHO_BIN_PX)

    def withdraw(points: np.ndarray):
        nonlocal votes
        if len(points) == 0 or len(votes) == 0:
            return
        keys = {(round(p[0], 3), round(p[1], 3)) for p in points}
        mask = np.array([(round(v[0], 3), round(v[1], 3)) in keys for v in votes])
        gone = votes[mask]
        votes = votes[~mask]
        if len(gone):
            rho = gone[:, 0:1] * cos_t[None, :] + gone[:, 1:2] * sin_t[None, :]
            bins = ((rho - rho_min) / C.HOUGH_RHO_BIN_PX).astype(np.int32)
            bins = np.clip(bins, 0, acc.shape[1] - 1)
            for t in range(len(thetas)):
                acc[t] -= np.bincount(bins[:, t], minlength=acc.shape[1])

    segments: list[PixelSegment] = []
    curved_pool: list[np.ndarray] = []
    veto_radius_px = C.CURVE_VETO_RADIUS_FT * px_per_ft

    for _ in range(400):
        if len(remaining) < support_min or acc.max() < support_min:
            break
        t_idx, r_idx = np.unravel_index(int(np.argmax(acc)), acc.shape)
        nx, ny = cos_t[t_idx], sin_t[t_idx]
        rho_val = rho_min + (r_idx + 0.5) * C.HOUGH_RHO_BIN_PX
        dist = np.abs(remaining[:, 0] * nx + remaining[:, 1] * ny - rho_val)
        band = dist <= C.RANSAC_BAND_PX * 1.5
        cand = remaining[band]
        if len(cand) < support_min:
            withdraw(cand)
            remaining = remaining[~band]
            curved_pool.append(cand)
            continue
        # split the band into runs along the line direction
        ux, uy = -ny, nx
        proj = cand[:, 0] * ux + cand[:, 1] * uy
        order = np.argsort(proj, kind="stable")
        cand = cand[order]
        proj = proj[order]
        gaps = np.nonzero(np.diff(proj) > C.LINE_RUN_GAP_PX)[0]
        starts = np.concatenate([[0], gaps + 1])
        ends = np.concatenate([gaps + 1, [len(cand)]])
        consumed_any = False
        for s, e in zip(starts, ends):
            run = cand[s:e]
            span = proj[e - 1] - proj[s]
            if len(run) < support_min or span < C.LINE_RUN_MIN_PX:
                continue
            refined = _ransac_refine(run, rng)
            if refined is None:
                continue
            seg, inliers = refined
            chunk = run[inliers]
            # consume stragglers hugging the accepted geometry, but nothing
            # beyond it (arc pixels outside the chord must survive)
            ax, ay = seg.a
            ux = (seg.b[0] - ax) / max(seg.length(), 1e-9)
            uy = (seg.b[1] - ay) / max(seg.length(), 1e-9)
            d_perp = np.abs((run[:, 0] - ax) * (-uy) + (run[:, 1] - ay) * ux)
            d_long = (run[:, 0] - ax) * ux + (run[:, 1] - ay) * uy
            near = ((d_perp <= C.RANSAC_BAND_PX * 1.75)
                    & (d_long >= -2.0) & (d_long <= seg.length() + 2.0))
            consumed = run[near | inliers]
            if _is_curved_chunk(chunk, veto_radius_px):
                # a tangent chord of a real arc: bank it for the arc pass
                curved_pool.append(consumed)
                withdraw(consumed)
                remaining = _without(remaining, consumed)
                consumed_any = True
                continue
            segments.append(seg)
            withdraw(consumed)
            remaining = _without(remaining, consumed)
            consumed_any = True
        if not consumed_any:
            # stale peak: retire its votes so the loop advances
            withdraw(cand)
            remaining = _without(remaining, cand)
            curved_pool.append(cand)

    leftover_parts = [remaining] + [p for p in curved_pool if len(p)]
    leftover = (np.vstack(leftover_parts) if any(len(p) for p in leftover_parts)
                else np.empty((0, 2)))
    segments = split_at_junctions(segments)
    return segments, leftover


def _is_curved_chunk(chunk: np.ndarray, veto_radius_px: float) -> bool:
    """True when an accepted inlier set is really a tangent chord of an arc:
    a plausibly tight circle fits clearly better than the best line."""
    if len(chunk) < 25:
        return False
    circle = _kasa_circle(chunk)
    if circle is None or not (20.0 <= circle[2] <= veto_radius_px):
        return False
    centroid, direction = _tls_line(chunk)
    proj = (chunk - centroid) @ direction
    span = float(proj.max() - proj.min())
    sagitta = span * span / (8.0 * circle[2])
    if span < 25.0 or sagitta < C.CURVE_VETO_SAGITTA_PX * 0.8:
        return False
    resid_c = np.abs(np.hypot(chunk[:, 0] - circle[0],
                              chunk[:, 1] - circle[1]) - circle[2])
    resid_l = np.abs((chunk - centroid) @ np.array([-direction[1], direction[0]]))
    circle_q = float(np.percentile(resid_c, 90))
    line_q = float(np.percentile(resid_l, 90))
    return circle_q <= 0.8 * line_q


def _without(pool: np.ndarray, gone: np.ndarray) -> np.ndarray:
    if len(pool) == 0 or len(gone) == 0:
        return pool
    keys = {(round(p[0], 3), round(p[1], 3)) for p in gone}
    mask = np.array([(round(v[0], 3), round(v[1], 3)) in keys for v in pool])
    return pool[~mask]


def _ransac_refine(run: np.ndarray, rng: np.random.Generator
                   ) -> tuple[PixelSegment, np.ndarray] | None:
    """Two-point RANSAC then total-least-squares refit; returns the segment
    and its inlier mask (only inliers may be consumed by the caller)."""
    n = len(run)
    if n < 2:
        return None
    best_count = -1
    best_mask = None
    pairs = rng.integers(0, n, size=(C.RANSAC_ITERS, 2))
    for i1, i2 in pairs:
        if i1 == i2:
            continue
        p1, p2 = run[i1], run[i2]
        dx, dy = p2[0] - p1[0], p2[1] - p1[1]
        norm = math.hypot(dx, dy)
        if norm < 1e-9:
            continue
        d = np.abs((run[:, 0] - p1[0]) * (-dy / norm)
                   + (run[:, 1] - p1[1]) * (dx / norm))
        mask = d <= C.RANSAC_BAND_PX
        count = int(mask.sum())
        if count > best_count:
            best_count, best_mask = count, mask
    if best_mask is None or best_count < 2:
        return None
    centroid, direction = _tls_line(run[best_mask])
    # re-select inliers against the refit line, then trim to the span
    d = np.abs((run - centroid) @ np.array([-direction[1], direction[0]]))
    inliers = d <= C.RANSAC_BAND_PX
    if inliers.sum() < 2:
        return None
    proj = (run[inliers] - centroid) @ direction
    lo, hi = proj.min(), proj.max()
    a = centroid + lo * direction
    b = centroid + hi * direction
    seg = PixelSegment((float(a[0]), float(a[1])),
                       (float(b[0]), float(b[1])), int(inliers.sum()))
    return seg, inliers


def split_at_junctions(segments: list[PixelSegment],
                       tol: float = 3.0) -> list[PixelSegment]:
    """Divide segments wherever they cross or meet at T-junctions."""
    out: list[PixelSegment] = []
    for i, seg in enumerate(segments):
        ax, ay = seg.a
        bx, by = seg.b
        ux, uy = bx - ax, by - ay
        length = math.hypot(ux, uy)
        if length < 1e-9:
            continue
        ux, uy = ux / length, uy / length
        cuts = [0.0, length]
        for j, other in enumerate(segments):
            if i == j:
                continue
            for p in _seg_intersections(seg, other, tol):
                s = (p[0] - ax) * ux + (p[1] - ay) * uy
                if tol < s < length - tol:
                    cuts.append(s)
        cuts = sorted(set(cuts))
        for s0, s1 in zip(cuts, cuts[1:]):
            if s1 - s0 < tol:
                continue
            out.append(PixelSegment((ax + s0 * ux, ay + s0 * uy),
                                    (ax + s1 * ux, ay + s1 * uy),
                                    max(2, int(seg.support * (s1 - s0) / length))))
    return out


def _seg_intersections(s1: PixelSegment, s2: PixelSegment,
                       tol: float) -> list[tuple[float, float]]:
    p1, p2, p3, p4 = s1.a, s1.b, s2.a, s2.b
    d1 = (p2[0] - p1[0], p2[1] - p1[1])
    d2 = (p4[0] - p3[0], p4[1] - p3[1])
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    out = []
    if abs(denom) > 1e-9:
        t = ((p3[0] - p1[0]) * d2[1] - (p3[1] - p1[1]) * d2[0]) / denom
        u = ((p3[0] - p1[0]) * d1[1] - (p3[1] - p1[1]) * d1[0]) / denom
        len1 = math.hypot(*d1)
        len2 = math.hypot(*d2)
        slack1 = tol / max(len1, 1e-9)
        slack2 = tol / max(len2, 1e-9)
        if -slack1 <= t <= 1 + slack1 and -slack2 <= u <= 1 + slack2:
            out.append((p1[0] + t * d1[0], p1[1] + t * d1[1]))
    return out
