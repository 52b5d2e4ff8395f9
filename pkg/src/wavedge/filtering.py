"""Sparse-scale maxima-line filtering.

Mod-max at a coarse scale s2 are connected to mod-max at the next finer
scale s1 by maximizing the decision function

    P(n, m) = Delta(n, m) * D(n, m) * Sign(n, m)

with ``Delta = exp(-|n - m| s1**-alpha)`` (distance) and
``D = exp(-|ln(|W(n)| / |W(m)|) / ln(s2 / s1) - c| s1**alpha)`` (decay).
In 2-D the Sign factor is replaced by ``exp(-|angle difference|)`` and the
decay center ``c`` is 1 instead of 1/2. On pixel scales (s1 > 1) a large
alpha weights the decay term, a small one the distance term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import ScaleSchedule, as_image, as_signal
from .cwt import cwt1d_rows, cwt2d
from .modmax import MaximaSet, ModMax, maxima_set_2d, maxima_set_rows

__all__ = [
    "DecisionParams",
    "CRITERIA",
    "decision_terms",
    "decision_1d",
    "decision_2d",
    "wrap_angle",
    "connect",
    "ScaleLinks",
    "MaximaLine",
    "ConnectionReport",
    "transform_levels",
    "filter_links",
    "filter_schedule",
    "oracle_links",
    "edge_focusing_oracle",
    "links_from_lines",
    "audit",
]

CRITERIA = ("full", "distance", "decay")


@dataclass(frozen=True)
class DecisionParams:
    """Parameters of the decision function.

    Parameters
    ----------
    alpha : float
        Control parameter weighting distance against decay.
    decay_center : float or None
        Expected decay exponent. ``None`` means 1/2 in 1-D and 1 in 2-D.
    window_factor : float
        Candidates are searched within ``window_factor * s1`` of the coarse
        mod-max.
    criterion : {"full", "distance", "decay"}
        ``"distance"`` and ``"decay"`` keep only that factor (times the
        sign/angle factor).
    """

    alpha: float = 0.0
    decay_center: float | None = None
    window_factor: float = 4.0
    criterion: str = "full"

    def __post_init__(self):
        if not self.window_factor > 0:
            raise ValueError("window_factor must be positive")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")

    def center(self, ndim: int) -> float:
        if self.decay_center is not None:
            return float(self.decay_center)
        return 0.5 if ndim == 1 else 1.0


def decision_terms(dist, wn, wm, s2, s1, alpha, center):
    """Distance and decay factors, vectorized over all array arguments.

    ``dist`` is the spatial distance, ``wn`` and ``wm`` the transform values
    (or moduli) at the coarse and fine mod-max.
    """
    dist = np.asarray(dist, dtype=np.float64)
    s1 = np.asarray(s1, dtype=np.float64)
    s2 = np.asarray(s2, dtype=np.float64)
    delta = np.exp(-dist * s1 ** (-alpha))
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.log(np.abs(wn) / np.abs(wm)) / np.log(s2 / s1)
    decay = np.exp(-np.abs(slope - center) * s1 ** alpha)
    return delta, np.nan_to_num(decay, nan=0.0)


def _combine(delta, decay, third, criterion):
    if criterion == "distance":
        return delta * third
    if criterion == "decay":
        return decay * third
    return delta * decay * third


def wrap_angle(d):
    """Wrap angle differences into (-pi, pi]."""
    d = np.asarray(d, dtype=np.float64)
    w = np.mod(d + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def _scale_of(mm, name):
    if mm.scale is None:
        raise ValueError(f"{name} has no scale")
    return float(mm.scale)


def decision_1d(n, m, p: DecisionParams) -> float:
    """Score of connecting coarse 1-D mod-max ``n`` to fine mod-max ``m``."""
    s2, s1 = _scale_of(n, "n"), _scale_of(m, "m")
    if not s2 > s1:
        raise ValueError("n must lie at the coarser scale")
    if n.value == 0 or m.value == 0:
        raise ValueError("transform values must be non-zero")
    delta, decay = decision_terms(abs(n.pos - m.pos), n.value, m.value, s2, s1, p.alpha, p.center(1))
    sign = 1.0 if n.value * m.value > 0 else 0.0
    return float(_combine(delta, decay, sign, p.criterion))


def decision_2d(n, m, p: DecisionParams) -> float:
    """Score of connecting 2-D mod-max ``n`` (coarse) to ``m`` (fine)."""
    s2, s1 = _scale_of(n, "n"), _scale_of(m, "m")
    if not s2 > s1:
        raise ValueError("n must lie at the coarser scale")
    dist = math.hypot(n.pos[0] - m.pos[0], n.pos[1] - m.pos[1])
    delta, decay = decision_terms(dist, n.value, m.value, s2, s1, p.alpha, p.center(2))
    angle = math.exp(-abs(float(wrap_angle(n.angle - m.angle))))
    return float(_combine(delta, decay, angle, p.criterion))


# ---------------------------------------------------------------------------
# Connecting mod-max between two scales


def _pair_scores(c: MaximaSet, f: MaximaSet, gi, fi, dist, p: DecisionParams):
    ndim = c.ndim
    delta, decay = decision_terms(dist, c.value[gi], f.value[fi], c.scale, f.scale, p.alpha, p.center(ndim))
    if ndim == 1:
        third = (c.value[gi] * f.value[fi] > 0).astype(np.float64)
    else:
        third = np.exp(-np.abs(wrap_angle(c.angle[gi] - f.angle[fi])))
    return _combine(delta, decay, third, p.criterion)


def _row_keys(ms: MaximaSet, stride: float) -> np.ndarray:
    if ms.row is None:
        return ms.pos
    return ms.row * stride + ms.pos


def _candidates_1d(c: MaximaSet, f: MaximaSet, w: float):
    """Flattened (coarse, fine) index pairs with |pos difference| <= w, same row."""
    top = max(c.pos.max(initial=0.0), f.pos.max(initial=0.0))
    stride = top + 2 * w + 4
    fk = _row_keys(f, stride)
    order = np.argsort(fk, kind="stable")
    fks = fk[order]
    ck = _row_keys(c, stride)
    lo = np.searchsorted(fks, ck - w, side="left")
    hi = np.searchsorted(fks, ck + w, side="right")
    counts = hi - lo
    gi = np.repeat(np.arange(len(c)), counts)
    offs = np.arange(gi.size) - np.repeat(np.cumsum(counts) - counts, counts)
    fi = order[np.repeat(lo, counts) + offs]
    return gi, fi, np.abs(c.pos[gi] - f.pos[fi])


def _candidates_2d(c: MaximaSet, f: MaximaSet, w: float):
    if len(f) == 0 or len(c) == 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e, np.zeros(0)
    pairs = cKDTree(c.pos).sparse_distance_matrix(cKDTree(f.pos), w, output_type="ndarray")
    order = np.argsort(pairs["i"], kind="stable")
    pairs = pairs[order]
    return pairs["i"].astype(np.int64), pairs["j"].astype(np.int64), pairs["v"]


def _argmax_groups(gi, fi, score, dist, n):
    """Per coarse index: best fine index by (score desc, dist asc, index asc).

    ``gi`` must be sorted.
    """
    choice = np.full(n, -1, dtype=np.int64)
    best = np.zeros(n)
    if gi.size == 0:
        return choice, best
    starts = np.flatnonzero(np.r_[True, gi[1:] != gi[:-1]])
    top = np.maximum.reduceat(score, starts)
    counts = np.diff(np.r_[starts, gi.size])
    tied = np.flatnonzero(score == np.repeat(top, counts))
    # ties are rare, so the full ordering is only applied to them
    order = tied[np.lexsort((fi[tied], dist[tied], gi[tied]))]
    g = gi[order]
    first = order[np.r_[True, g[1:] != g[:-1]]]
    ok = score[first] > 0
    choice[gi[first[ok]]] = fi[first[ok]]
    best[gi[first[ok]]] = score[first[ok]]
    return choice, best


def connect(coarse: MaximaSet, fine: MaximaSet, p: DecisionParams, subset=None):
    """Connect each coarse mod-max to the fine mod-max maximizing P.

    Candidates lie within ``p.window_factor * s1`` (and in the same row for
    batched rows). Ties go to the smaller distance, then the smaller index.
    Returns ``(choice, score)`` where ``choice[i]`` indexes ``fine`` or is -1
    when the coarse mod-max has no candidate with positive score. With
    ``subset`` only those coarse indices are evaluated (others get -1).
    """
    if not coarse.scale > fine.scale:
        raise ValueError("coarse scale must exceed fine scale")
    if coarse.ndim != fine.ndim:
        raise ValueError("mixed 1-D and 2-D maxima")
    w = p.window_factor * fine.scale
    c = coarse if subset is None else _take(coarse, subset)
    if len(c) == 0 or len(fine) == 0:
        choice, best = np.full(len(c), -1, dtype=np.int64), np.zeros(len(c))
    else:
        if coarse.ndim == 1:
            gi, fi, d = _candidates_1d(c, fine, w)
        else:
            gi, fi, d = _candidates_2d(c, fine, w)
        sc = _pair_scores(c, fine, gi, fi, d, p)
        choice, best = _argmax_groups(gi, fi, sc, d, len(c))
    if subset is None:
        return choice, best
    full_c = np.full(len(coarse), -1, dtype=np.int64)
    full_s = np.zeros(len(coarse))
    full_c[subset] = choice
    full_s[subset] = best
    return full_c, full_s


def _take(ms: MaximaSet, idx) -> MaximaSet:
    idx = np.asarray(idx, dtype=np.int64)
    return MaximaSet(
        ms.scale,
        ms.pos[idx],
        ms.value[idx],
        None if ms.angle is None else ms.angle[idx],
        None if ms.row is None else ms.row[idx],
    )


# ---------------------------------------------------------------------------
# Linked maxima across a schedule


@dataclass(frozen=True)
class MaximaLine:
    """Chain of mod-max ordered coarse to fine.

    A line that lost a merge ends with the shared mod-max, which continues
    on the line ``merged_into``.
    """

    id: int
    entries: tuple
    merged_into: int | None = None

    def __len__(self):
        return len(self.entries)

    @property
    def scales(self):
        return [e.scale for e in self.entries]


def _best_parent(choice, score, n_fine):
    parent = np.full(n_fine, -1, dtype=np.int64)
    ok = np.flatnonzero(choice >= 0)
    if ok.size == 0:
        return parent
    order = np.lexsort((ok, -score[ok], choice[ok]))
    k = choice[ok][order]
    first = order[np.r_[True, k[1:] != k[:-1]]]
    parent[choice[ok][first]] = ok[first]
    return parent


@dataclass
class ScaleLinks:
    """Mod-max per scale (coarse to fine) and the connections between them.

    ``choice[j][i]`` is the index in ``levels[j + 1]`` chosen by mod-max
    ``i`` of ``levels[j]``, or -1. ``score`` holds the decision values.
    """

    levels: list
    choice: list
    score: list

    @property
    def scales(self) -> list[float]:
        return [lv.scale for lv in self.levels]

    def parents(self, j: int) -> np.ndarray:
        """Best parent in ``levels[j]`` of every mod-max in ``levels[j + 1]``."""
        return _best_parent(self.choice[j], self.score[j], len(self.levels[j + 1]))

    def relevance(self, weight=None) -> np.ndarray:
        """Sum of ``weight(s) |W|`` up the best-parent chain, for the finest level."""
        mu = (lambda s: 1.0) if weight is None else weight
        R = mu(self.levels[0].scale) * np.abs(self.levels[0].value)
        for j in range(len(self.levels) - 1):
            par = self.parents(j)
            lv = self.levels[j + 1]
            R = mu(lv.scale) * np.abs(lv.value) + np.where(par >= 0, R[np.maximum(par, 0)], 0.0)
        return R

    def lines(self) -> list[MaximaLine]:
        chains = []  # lists of (level, index)
        merged = []
        owner = list(range(len(self.levels[0])))
        for i in range(len(self.levels[0])):
            chains.append([(0, i)])
            merged.append(None)
        for j in range(len(self.levels) - 1):
            nf = len(self.levels[j + 1])
            par = self.parents(j)
            new_owner = [-1] * nf
            for k in range(nf):
                if par[k] >= 0:
                    lid = owner[par[k]]
                    chains[lid].append((j + 1, k))
                    new_owner[k] = lid
            for i, k in enumerate(self.choice[j].tolist()):
                if k >= 0 and par[k] != i:
                    lid = owner[i]
                    chains[lid].append((j + 1, k))
                    merged[lid] = new_owner[k]
            for k in range(nf):
                if new_owner[k] < 0:
                    new_owner[k] = len(chains)
                    chains.append([(j + 1, k)])
                    merged.append(None)
            owner = new_owner
        return [
            MaximaLine(lid, tuple(self._modmax(j, i) for j, i in ch), merged[lid]) for lid, ch in enumerate(chains)
        ]

    def _modmax(self, j, i) -> ModMax:
        lv = self.levels[j]
        if lv.ndim == 1:
            return ModMax(int(lv.pos[i]), lv.scale, float(lv.value[i]))
        return ModMax((int(lv.pos[i, 0]), int(lv.pos[i, 1])), lv.scale, float(lv.value[i]), angle=float(lv.angle[i]))


def transform_levels(source, scales, mode: str | None = None, interpolate: bool = True) -> list[MaximaSet]:
    """Mod-max of ``source`` at each scale.

    ``mode`` is ``"1d"`` for a signal, ``"rows"`` for every row of an image
    treated as a 1-D signal, ``"2d"`` for the 2-D transform. By default a 1-D
    array uses ``"1d"`` and a 2-D array ``"2d"``.
    """
    a = np.asarray(source, dtype=np.float64)
    if mode is None:
        mode = "1d" if a.ndim == 1 else "2d"
    levels = []
    if mode == "1d":
        f = as_signal(a)[None, :]
        for s in scales:
            ms = maxima_set_rows(cwt1d_rows(f, s), s)
            levels.append(MaximaSet(ms.scale, ms.pos, ms.value))
    elif mode == "rows":
        img = as_image(a)
        for s in scales:
            levels.append(maxima_set_rows(cwt1d_rows(img, s), s))
    elif mode == "2d":
        img = as_image(a)
        for s in scales:
            levels.append(maxima_set_2d(cwt2d(img, s), interpolate=interpolate))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return levels


def _schedule(sched) -> tuple[float, ...]:
    if isinstance(sched, ScaleSchedule):
        return sched.scales
    return ScaleSchedule.parse(sched).scales


def filter_links(source, sched, p: DecisionParams, mode: str | None = None, levels=None) -> ScaleLinks:
    """Run the sparse-scale filter and return the linked structure."""
    if levels is None:
        levels = transform_levels(source, _schedule(sched), mode)
    choice, score = [], []
    for c, f in zip(levels, levels[1:]):
        ch, sc = connect(c, f, p)
        choice.append(ch)
        score.append(sc)
    return ScaleLinks(levels, choice, score)


def filter_schedule(source, sched, p: DecisionParams) -> list[MaximaLine]:
    """Maxima-lines of a signal or image over a sparse scale schedule.

    Mod-max at consecutive scales are connected by maximizing the decision
    function; fine mod-max chosen by nobody start new lines. Several coarse
    mod-max may choose the same fine one: the highest-scoring one continues
    and the others end there.
    """
    return filter_links(source, sched, p).lines()


# ---------------------------------------------------------------------------
# Edge-focusing oracle


def _focus_step(c: MaximaSet, f: MaximaSet, s: float):
    win = max(2, math.ceil(s / 4))
    n = len(c)
    choice = np.full(n, -1, dtype=np.int64)
    if n == 0 or len(f) == 0:
        return choice, np.zeros(n)
    gi, fi, d = _candidates_1d(c, f, win)
    ok = c.value[gi] * f.value[fi] > 0
    gi, fi, d = gi[ok], fi[ok], d[ok]
    if gi.size:
        # nearest same-sign candidate, ties to the larger |W|
        order = np.lexsort((fi, -np.abs(f.value[fi]), d, gi))
        g = gi[order]
        first = order[np.r_[True, g[1:] != g[:-1]]]
        choice[gi[first]] = fi[first]
        dist = np.full(n, np.inf)
        dist[gi[first]] = d[first]
        # a fine mod-max claimed twice stays with the nearest coarse one
        picked = np.flatnonzero(choice >= 0)
        order = np.lexsort((picked, -np.abs(c.value[picked]), dist[picked], choice[picked]))
        k = choice[picked][order]
        losers = picked[order][np.r_[False, k[1:] == k[:-1]]]
        choice[losers] = -1
    score = np.where(choice >= 0, 1.0, 0.0)
    return choice, score


def oracle_scales(s_max: float, s_min: float, step: float = 0.5) -> np.ndarray:
    n = int(round((s_max - s_min) / step))
    return s_max - step * np.arange(n + 1)


def oracle_links(source, s_max: float, s_min: float, mode: str | None = None, step: float = 0.5) -> ScaleLinks:
    """Dense-scale edge-focusing links (step 1/2 by default)."""
    if not s_max > s_min >= 1:
        raise ValueError("need s_max > s_min >= 1")
    a = np.asarray(source)
    if mode is None:
        mode = "1d" if a.ndim == 1 else "rows"
    if mode == "2d":
        raise ValueError("the edge-focusing oracle works on 1-D signals or image rows")
    scales = oracle_scales(s_max, s_min, step)
    levels = transform_levels(source, scales, mode)
    choice, score = [], []
    for c, f in zip(levels, levels[1:]):
        ch, sc = _focus_step(c, f, c.scale)
        choice.append(ch)
        score.append(sc)
    return ScaleLinks(levels, choice, score)


def edge_focusing_oracle(source, s_max: float, s_min: float) -> list[MaximaLine]:
    """Reference maxima-lines tracked over scales spaced by 1/2.

    Each mod-max moves to the nearest mod-max of the same sign at the next
    finer scale within ``max(2, ceil(s/4))`` pixels (ties to the larger
    ``|W|``); untrackable mod-max end their line.
    """
    return oracle_links(as_signal(source), s_max, s_min).lines()


# ---------------------------------------------------------------------------
# Audit


def links_from_lines(lines) -> ScaleLinks:
    """Rebuild the linked structure from 1-D maxima-lines."""
    nodes: dict = {}
    for line in lines:
        for e in line.entries:
            nodes.setdefault(float(e.scale), {})[int(e.pos)] = float(e.value)
    scales = sorted(nodes, reverse=True)
    levels, index = [], []
    for s in scales:
        pos = np.array(sorted(nodes[s]), dtype=np.float64)
        levels.append(MaximaSet(s, pos, np.array([nodes[s][int(q)] for q in pos])))
        index.append({int(q): i for i, q in enumerate(pos)})
    lvl = {s: j for j, s in enumerate(scales)}
    choice = [np.full(len(levels[j]), -1, dtype=np.int64) for j in range(len(levels) - 1)]
    for line in lines:
        for a, b in zip(line.entries, line.entries[1:]):
            ja, jb = lvl[float(a.scale)], lvl[float(b.scale)]
            if jb != ja + 1:
                raise ValueError("line skips a scale")
            choice[ja][index[ja][int(a.pos)]] = index[jb][int(b.pos)]
    score = [np.where(c >= 0, 1.0, 0.0) for c in choice]
    return ScaleLinks(levels, choice, score)


@dataclass(frozen=True)
class PairReport:
    coarse: float
    fine: float
    connections: int
    verified: int
    false: int
    displacement: float  # mean |pixel offset| of false connections, fine end

    @property
    def false_pct(self) -> float:
        return 100.0 * self.false / self.verified if self.verified else 0.0


@dataclass(frozen=True)
class ConnectionReport:
    """False-connection statistics of a sparse filter against the oracle.

    Connections whose coarse mod-max has no oracle descendant at the finer
    scale cannot be judged and are counted as unverified.
    """

    pairs: tuple

    @property
    def verified(self) -> int:
        return sum(p.verified for p in self.pairs)

    @property
    def false(self) -> int:
        return sum(p.false for p in self.pairs)

    @property
    def unverified(self) -> int:
        return sum(p.connections - p.verified for p in self.pairs)

    @property
    def overall_pct(self) -> float:
        return 100.0 * self.false / self.verified if self.verified else 0.0

    @property
    def displacement(self) -> float:
        n = self.false
        if n == 0:
            return 0.0
        return sum(p.displacement * p.false for p in self.pairs) / n

    def rows(self) -> list[tuple[str, float]]:
        out = [(f"false {p.coarse:g}-{p.fine:g} (%)", p.false_pct) for p in self.pairs]
        out.append(("false overall (%)", self.overall_pct))
        out.append(("spatial error (px)", self.displacement))
        return out

    @staticmethod
    def merge(reports) -> "ConnectionReport":
        """Pool counts of reports over the same scale pairs."""
        reports = list(reports)
        pairs = []
        for group in zip(*(r.pairs for r in reports)):
            nf = sum(p.false for p in group)
            disp = sum(p.displacement * p.false for p in group) / nf if nf else 0.0
            pairs.append(
                PairReport(
                    group[0].coarse,
                    group[0].fine,
                    sum(p.connections for p in group),
                    sum(p.verified for p in group),
                    nf,
                    disp,
                )
            )
        return ConnectionReport(tuple(pairs))


def _level_index(links: ScaleLinks, s: float) -> int:
    for j, t in enumerate(links.scales):
        if math.isclose(t, s, rel_tol=1e-9):
            return j
    raise ValueError(f"scale {s} is not among the oracle scales")


def _lookup(src: MaximaSet, dst: MaximaSet) -> np.ndarray:
    """Index in ``dst`` of each mod-max of ``src`` at the same place, or -1."""
    top = max(src.pos.max(initial=0.0), dst.pos.max(initial=0.0)) + 2
    ks = _row_keys(src, top)
    kd = _row_keys(dst, top)
    order = np.argsort(kd)
    i = np.searchsorted(kd[order], ks)
    i = np.minimum(i, max(len(kd) - 1, 0))
    out = np.full(len(src), -1, dtype=np.int64)
    if len(kd):
        hit = kd[order][i] == ks
        out[hit] = order[i[hit]]
    return out


def audit(sparse, truth) -> ConnectionReport:
    """Compare sparse connections with the oracle.

    A connection ``n -> m`` between schedule scales is false when the
    oracle's descendant of ``n`` at the finer scale is not ``m``. Both
    arguments may be :class:`ScaleLinks` or lists of 1-D maxima-lines.
    """
    sp = sparse if isinstance(sparse, ScaleLinks) else links_from_lines(sparse)
    tr = truth if isinstance(truth, ScaleLinks) else links_from_lines(truth)
    pairs = []
    for j in range(len(sp.levels) - 1):
        c, f = sp.levels[j], sp.levels[j + 1]
        a = _level_index(tr, c.scale)
        b = _level_index(tr, f.scale)
        if b <= a:
            raise ValueError("sparse scales are not ordered like the oracle scales")
        node = _lookup(c, tr.levels[a])
        for k in range(a, b):
            ch = tr.choice[k]
            node = np.where(node >= 0, ch[np.maximum(node, 0)], -1)
        fine_in_truth = _lookup(f, tr.levels[b])
        conn = np.flatnonzero(sp.choice[j] >= 0)
        m = sp.choice[j][conn]
        desc = node[conn]
        ok = desc >= 0
        wrong = ok & (fine_in_truth[m] != desc)
        tpos = tr.levels[b].pos
        disp = np.abs(f.pos[m[wrong]] - tpos[desc[wrong]]) if tpos.ndim == 1 else np.zeros(0)
        pairs.append(
            PairReport(
                c.scale,
                f.scale,
                int(conn.size),
                int(ok.sum()),
                int(wrong.sum()),
                float(disp.mean()) if disp.size else 0.0,
            )
        )
    return ConnectionReport(tuple(pairs))
