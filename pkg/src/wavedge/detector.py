"""Edge maps from maxima-lines.

1-D: every finest-scale mod-max ``a`` gets the relevance
``R(a) = sum mu(s) |Wf(u, s)|`` over its maxima-line and is kept when
``R(a) > T``.

2-D: finest-scale mod-max are chained into boundary curves and each curve
gets ``S(c) = (number of points) * mean(R)``, where the mean runs over a
random subset of its points. Only the maxima-lines through the sampled
points are traced, which is what makes the 2-D detector fast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .core import as_image, as_signal
from .cwt import cwt2d
from .filtering import DecisionParams, MaximaLine, _best_parent, _schedule, connect, filter_links, transform_levels
from .modmax import MaximaSet, chain_indices, maxima_set_2d

__all__ = [
    "DetectorParams",
    "EdgeMap",
    "relevance",
    "curve_score",
    "sample_points",
    "trace_relevance",
    "auto_threshold",
    "robust_threshold",
    "detect_1d",
    "detect_2d",
    "canny_baseline",
]


@dataclass(frozen=True)
class DetectorParams:
    """Threshold, subsampling and scale weighting of the detector.

    ``threshold`` is a positive number, ``"auto"`` (largest gap in the
    sorted log scores) or ``"robust"`` (``median + robust_k * MAD`` of the
    log scores, treating the bulk of low scores as noise). ``fraction`` of
    each curve's points is sampled with a generator seeded by ``seed`` and
    the curve id.
    """

    threshold: float | str = "auto"
    fraction: float = 1.0
    seed: int = 0
    weight: Callable | None = None
    robust_k: float = 2.0

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise ValueError("fraction must lie in (0, 1]")
        if isinstance(self.threshold, str):
            if self.threshold not in ("auto", "robust"):
                raise ValueError("threshold must be a positive number, 'auto' or 'robust'")
        elif not self.threshold > 0:
            raise ValueError("threshold must be positive")


@dataclass(frozen=True)
class EdgeMap:
    """Binary edge mask plus the ``(id, score)`` of every accepted item."""

    mask: np.ndarray
    accepted: tuple = ()
    scores: dict = field(default_factory=dict, repr=False)
    threshold: float = 0.0

    @property
    def count(self) -> int:
        return int(self.mask.sum())


def relevance(line: MaximaLine, weight: Callable | None = None) -> float:
    """Sum of ``weight(s) * |value|`` over the entries of a maxima-line."""
    if len(line.entries) == 0:
        raise ValueError("empty maxima-line")
    mu = weight or (lambda s: 1.0)
    return float(sum(mu(e.scale) * abs(e.value) for e in line.entries))


def curve_score(length: int, sampled_relevance) -> float:
    """``length * mean(sampled_relevance)``."""
    r = np.asarray(sampled_relevance, dtype=np.float64)
    if r.size == 0:
        raise ValueError("no sampled points")
    if length < 1:
        raise ValueError("curve must be non-empty")
    return float(length * r.mean())


def sample_points(n: int, fraction: float, seed: int, curve_id: int) -> np.ndarray:
    """Indices of ``ceil(fraction * n)`` points chosen without replacement.

    The generator is derived from ``(seed, curve_id)`` so every curve's draw
    is reproducible independently of the others.
    """
    k = min(n, max(1, math.ceil(fraction * n - 1e-12)))
    if k == n:
        return np.arange(n)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(curve_id,)))
    return np.sort(rng.choice(n, size=k, replace=False))


def auto_threshold(scores) -> float:
    """Threshold in the largest gap of the sorted log scores.

    Returns the score just below the gap, so ``score > T`` accepts
    everything above it. With fewer than two scores everything is accepted.
    """
    s = np.sort(np.asarray(scores, dtype=np.float64)[np.asarray(scores) > 0])[::-1]
    if s.size < 2:
        return 0.0
    gaps = -np.diff(np.log(s))
    i = int(np.argmax(gaps))
    return float(s[i + 1])


def robust_threshold(scores, k: float = 2.0) -> float:
    """``exp(median + k * MAD)`` of the log scores.

    Noise curves form the bulk of the score distribution, edges its upper
    tail; the MAD is scaled to a normal standard deviation.
    """
    s = np.asarray(scores, dtype=np.float64)
    s = s[s > 0]
    if s.size < 2:
        return 0.0
    ls = np.log(s)
    med = np.median(ls)
    mad = 1.4826 * np.median(np.abs(ls - med))
    return float(np.exp(med + k * mad))


def _threshold(scores, params: DetectorParams) -> float:
    if params.threshold == "auto":
        return auto_threshold(scores)
    if params.threshold == "robust":
        return robust_threshold(scores, params.robust_k)
    return float(params.threshold)


def detect_1d(signal, sched, dparams: DecisionParams, fparams: DetectorParams = DetectorParams()) -> EdgeMap:
    """Finest-scale mod-max whose maxima-line relevance exceeds the threshold."""
    f = as_signal(signal)
    links = filter_links(f, sched, dparams, mode="1d")
    fine = links.levels[-1]
    R = links.relevance(fparams.weight)
    T = _threshold(R, fparams)
    keep = np.flatnonzero(R > T)
    mask = np.zeros(f.size, dtype=bool)
    mask[fine.pos[keep].astype(np.int64)] = True
    scores = {int(fine.pos[i]): float(R[i]) for i in range(len(fine))}
    return EdgeMap(mask, tuple((int(fine.pos[i]), float(R[i])) for i in keep), scores, T)


def trace_relevance(levels: list[MaximaSet], seeds, p: DecisionParams, weight=None) -> np.ndarray:
    """Relevance of selected finest-scale mod-max, tracing only their lines.

    At each level only coarse mod-max within the candidate window of a live
    node are evaluated; since a coarse mod-max can only choose fine ones
    inside its window, the best parents found are exactly those of the full
    filter.
    """
    mu = weight or (lambda s: 1.0)
    seeds = np.asarray(seeds, dtype=np.int64)
    fine = levels[-1]
    R = mu(fine.scale) * np.abs(fine.value[seeds])
    node = seeds.copy()
    alive = np.ones(seeds.size, dtype=bool)
    for j in range(len(levels) - 2, -1, -1):
        if not alive.any():
            break
        c, f = levels[j], levels[j + 1]
        live = np.unique(node[alive])
        cand = _near(c, f.pos[live], p.window_factor * f.scale)
        choice, score = connect(c, f, p, subset=cand)
        parent = _best_parent(choice, score, len(f))
        par = np.where(alive, parent[np.maximum(node, 0)], -1)
        alive &= par >= 0
        R = R + np.where(alive, mu(c.scale) * np.abs(c.value[np.maximum(par, 0)]), 0.0)
        node = np.where(alive, par, -1)
    return R


def _near(ms: MaximaSet, pts: np.ndarray, r: float) -> np.ndarray:
    if len(ms) == 0 or len(pts) == 0:
        return np.zeros(0, dtype=np.int64)
    tree = cKDTree(ms.pos)
    hits = tree.query_ball_point(pts, r=r)
    idx = np.fromiter((i for h in hits for i in h), dtype=np.int64)
    return np.unique(idx)


def detect_2d(image, sched, dparams: DecisionParams, fparams: DetectorParams = DetectorParams(), levels=None) -> EdgeMap:
    """Boundary curves at the finest scale with score ``S`` above the threshold."""
    img = as_image(image)
    if levels is None:
        levels = transform_levels(img, _schedule(sched), mode="2d")
    fine = levels[-1]
    curves = chain_indices(fine)
    mask = np.zeros(img.shape, dtype=bool)
    if not curves:
        return EdgeMap(mask, (), {}, 0.0)
    picks = [c[sample_points(c.size, fparams.fraction, fparams.seed, cid)] for cid, c in enumerate(curves)]
    R = trace_relevance(levels, np.concatenate(picks), dparams, fparams.weight)
    bounds = np.cumsum([0] + [p.size for p in picks])
    S = np.array([curve_score(c.size, R[a:b]) for c, a, b in zip(curves, bounds[:-1], bounds[1:])])
    T = _threshold(S, fparams)
    accepted = []
    for cid, (c, sc) in enumerate(zip(curves, S)):
        if sc > T:
            pts = fine.pos[c].astype(np.int64)
            mask[pts[:, 0], pts[:, 1]] = True
            accepted.append((cid, float(sc)))
    return EdgeMap(mask, tuple(accepted), {cid: float(sc) for cid, sc in enumerate(S)}, T)


def canny_baseline(image, s: float, low: float = 0.1, high: float = 0.3, interpolate: bool = True) -> EdgeMap:
    """Single-scale mod-max with hysteresis thresholds relative to max modulus.

    Components (8-connected) of mod-max above ``low * max|Wf|`` are kept when
    they contain a pixel above ``high * max|Wf|``.
    """
    if not s >= 1:
        raise ValueError("scale must be >= 1")
    if not 0 <= low <= high:
        raise ValueError("need 0 <= low <= high")
    img = as_image(image)
    plane = cwt2d(img, s)
    mod = np.asarray(plane.modulus)
    mask = np.zeros(img.shape, dtype=bool)
    peak = float(mod.max())
    if peak <= 0:
        return EdgeMap(mask, (), {}, 0.0)
    ms = maxima_set_2d(plane, interpolate=interpolate)
    mm = np.zeros(img.shape, dtype=bool)
    mm[ms.pos[:, 0].astype(np.int64), ms.pos[:, 1].astype(np.int64)] = True
    weak = mm & (mod >= low * peak)
    labels, n = ndimage.label(weak, structure=np.ones((3, 3)))
    if n == 0:
        return EdgeMap(mask, (), {}, high * peak)
    strong = np.unique(labels[weak & (mod >= high * peak)])
    strong = strong[strong > 0]
    keep = np.zeros(n + 1, dtype=bool)
    keep[strong] = True
    mask = keep[labels]
    return EdgeMap(mask, tuple((int(k), 0.0) for k in strong), {}, high * peak)
