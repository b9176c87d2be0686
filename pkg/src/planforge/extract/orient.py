"""Orientation clustering on doubled angles with BIC-driven model selection.

Wall directions live mod pi, so 2*theta maps them onto the full circle where
a 1-D circular mixture applies. Candidate partitions come from the K largest
circular gaps (exact for separated clusters), each polished by a few EM steps;
K in [1, 8] minimizing BIC wins, AIC is recorded as a diagnostic. Fully
deterministic: no random initialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import constants as C

MAX_K = 8
_VAR_FLOOR = math.radians(1.0) ** 2  # doubled-angle space
TWO_PI = 2.0 * math.pi


@dataclass
class OrientationModel:
    k: int
    means: list[float]          # cluster directions, mod pi
    bic: float
    aic: float
    weights: list[float] = field(default_factory=list)
    assignments: list[int] = field(default_factory=list)

    def nearest_mean(self, angle: float) -> tuple[int, float]:
        """(cluster index, absolute angular distance mod pi)."""
        best, best_d = 0, math.inf
        for i, mu in enumerate(self.means):
            d = abs((angle - mu + math.pi / 2) % math.pi - math.pi / 2)
            if d < best_d:
                best, best_d = i, d
        return best, best_d


def _circ_diff(a: np.ndarray, mu: float) -> np.ndarray:
    return (a - mu + math.pi) % TWO_PI - math.pi


def _circ_mean(a: np.ndarray, w: np.ndarray | None = None) -> float:
    if w is None:
        w = np.ones(len(a))
    return math.atan2(float(np.sum(w * np.sin(a))),
                      float(np.sum(w * np.cos(a)))) % TWO_PI


def _fit_k(doubled: np.ndarray, weights_in: np.ndarray, k: int
           ) -> tuple[float, list[float], list[float], np.ndarray]:
    """Gap-partition init + EM polish; returns (logL, means, weights, resp)."""
    n = len(doubled)
    order = np.argsort(doubled, kind="stable")
    sorted_a = doubled[order]
    gaps = np.diff(np.concatenate([sorted_a, [sorted_a[0] + TWO_PI]]))
    if k == 1:
        groups = [np.arange(n)]
    else:
        cut_after = np.sort(np.argsort(-gaps, kind="stable")[:k])
        groups = []
        prev = None
        boundaries = list(cut_after)
        for gi in range(len(boundaries)):
            lo = (boundaries[gi - 1] + 1) % n if gi > 0 else boundaries[-1] + 1
            hi = boundaries[gi]
            if lo <= hi:
                groups.append(order[np.arange(lo, hi + 1)])
            else:
                groups.append(order[np.concatenate([np.arange(lo, n),
                                                    np.arange(0, hi + 1)])])
        groups = [g for g in groups if len(g)]
    if len(groups) < k:
        return -math.inf, [], [], np.zeros((n, k))

    mus = np.array([_circ_mean(doubled[g], weights_in[g]) for g in groups])
    sigmas = np.full(len(groups), math.sqrt(_VAR_FLOOR))
    pis = np.array([weights_in[g].sum() for g in groups])
    pis = pis / pis.sum()

    resp = np.zeros((n, len(groups)))
    for _ in range(8):
        # E step: wrapped-normal responsibilities (wrap negligible at our spread)
        log_p = np.empty((n, len(mus)))
        for j, (mu, sg, pi) in enumerate(zip(mus, sigmas, pis)):
            d = _circ_diff(doubled, mu)
            log_p[:, j] = (math.log(max(pi, 1e-12))
                           - 0.5 * math.log(2 * math.pi * sg * sg)
                           - d * d / (2 * sg * sg))
        mx = log_p.max(axis=1, keepdims=True)
        p = np.exp(log_p - mx)
        resp = p / p.sum(axis=1, keepdims=True)
        # M step
        for j in range(len(mus)):
            w = resp[:, j] * weights_in
            if w.sum() < 1e-9:
                continue
            mus[j] = _circ_mean(doubled, w)
            d = _circ_diff(doubled, mus[j])
            var = float(np.sum(w * d * d) / w.sum())
            sigmas[j] = math.sqrt(max(var, _VAR_FLOOR))
        pis = (resp * weights_in[:, None]).sum(axis=0)
        pis = pis / pis.sum()

    log_p = np.empty((n, len(mus)))
    for j, (mu, sg, pi) in enumerate(zip(mus, sigmas, pis)):
        d = _circ_diff(doubled, mu)
        log_p[:, j] = (math.log(max(pi, 1e-12))
                       - 0.5 * math.log(2 * math.pi * sg * sg)
                       - d * d / (2 * sg * sg))
    mx = log_p.max(axis=1)
    ll = float(np.sum(mx + np.log(np.exp(log_p - mx[:, None]).sum(axis=1))))
    return ll, list(mus), list(pis), resp


def cluster_orientations(angles: list[float],
                         weights: list[float] | None = None) -> OrientationModel:
    """Select K in [1, 8] by BIC over circular mixtures of doubled angles."""
    if not angles:
        raise ValueError("no segment orientations to cluster")
    doubled = np.array([(2.0 * a) % TWO_PI for a in angles])
    w = np.array(weights if weights is not None else np.ones(len(angles)))
    n = len(doubled)
    best = None
    for k in range(1, min(MAX_K, n) + 1):
        ll, mus, pis, resp = _fit_k(doubled, w, k)
        if not mus:
            continue
        if k > 1:
            # sub-resolution components are fit artifacts, not wall directions
            sep = min(abs((m1 - m2 + math.pi) % TWO_PI - math.pi)
                      for i, m1 in enumerate(mus) for m2 in mus[i + 1:])
            if sep < math.radians(6.0):
                continue
        params = 3 * k - 1
        bic = -2.0 * ll + params * math.log(n)
        aic = 2.0 * params - 2.0 * ll
        if best is None or bic < best[0] - 1e-9:
            assign = list(np.argmax(resp, axis=1)) if len(mus) > 1 else [0] * n
            best = (bic, aic, k, mus, pis, assign)
    bic, aic, k, mus, pis, assign = best
    means = sorted((mu / 2.0) % math.pi for mu in mus)
    model = OrientationModel(k, means, bic, aic, list(pis), assign)
    # a substantive segment departing far from every mean seeds a new angled
    # cluster (weight gate keeps lone noise fragments from spawning clusters)
    extra: list[float] = []
    threshold = math.radians(C.NEW_CLUSTER_DEVIATION_DEG)
    for a, wt in zip(angles, w):
        if wt < 3.0:
            continue
        _, d = model.nearest_mean(a % math.pi)
        if d > threshold and len(model.means) + len(extra) < MAX_K:
            if all(abs((a - e + math.pi / 2) % math.pi - math.pi / 2) > threshold
                   for e in extra):
                extra.append(a % math.pi)
    if extra:
        model.means = sorted(model.means + extra)
        model.k = len(model.means)
    return model
