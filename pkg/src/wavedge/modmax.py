"""Modulus-maxima extraction and boundary-curve chaining."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .cwt import WaveletPlane1D, WaveletPlane2D

__all__ = [
    "ModMax",
    "MaximaSet",
    "BoundaryCurve",
    "EPS_FLOOR",
    "maxima_mask_1d",
    "maxima_set_1d",
    "maxima_set_2d",
    "maxima_set_rows",
    "detect1d",
    "detect2d",
    "chain_curves",
    "chain_indices",
]

EPS_FLOOR = 1e-6


@dataclass(frozen=True)
class ModMax:
    """One modulus maximum.

    ``pos`` is an index (1-D) or a ``(row, col)`` pair (2-D). ``value`` is the
    signed transform value in 1-D and the modulus in 2-D. ``sign`` is set for
    1-D maxima, ``angle`` for 2-D maxima.
    """

    pos: float | tuple
    scale: float
    value: float
    sign: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.angle is None:
            if self.value == 0:
                raise ValueError("1-D modulus maximum must have a non-zero value")
            sign = 1 if self.value > 0 else -1
            if self.sign is None:
                object.__setattr__(self, "sign", sign)
            elif self.sign != sign:
                raise ValueError("sign does not match the transform value")
        elif not self.value > 0:
            raise ValueError("2-D modulus maximum must have a positive modulus")


@dataclass(frozen=True)
class MaximaSet:
    """Array form of the maxima at one scale, used on hot paths.

    ``pos`` has shape (K,) in 1-D and (K, 2) as (row, col) in 2-D. ``value`` is
    signed in 1-D and the modulus in 2-D; ``angle`` is None in 1-D. For
    batches of 1-D signals (image rows) ``row`` holds the signal index of
    each maximum, sorted by (row, pos).
    """

    scale: float
    pos: np.ndarray
    value: np.ndarray
    angle: np.ndarray | None = None
    row: np.ndarray | None = None

    def __len__(self):
        return len(self.value)

    @property
    def ndim(self) -> int:
        return 1 if self.pos.ndim == 1 else 2

    def to_list(self) -> list[ModMax]:
        if self.angle is None:
            return [ModMax(int(p), self.scale, float(v)) for p, v in zip(self.pos, self.value)]
        return [
            ModMax((int(p[0]), int(p[1])), self.scale, float(v), angle=float(a))
            for p, v, a in zip(self.pos, self.value, self.angle)
        ]

    @classmethod
    def from_list(cls, maxima: Sequence[ModMax], scale: float | None = None) -> "MaximaSet":
        maxima = list(maxima)
        if scale is None:
            if not maxima:
                raise ValueError("scale is required for an empty maxima list")
            scale = maxima[0].scale
        if maxima and isinstance(maxima[0].pos, tuple):
            pos = np.array([m.pos for m in maxima], dtype=np.float64).reshape(-1, 2)
            ang = np.array([m.angle for m in maxima], dtype=np.float64)
        else:
            pos = np.array([m.pos for m in maxima], dtype=np.float64)
            ang = None
        val = np.array([m.value for m in maxima], dtype=np.float64)
        return cls(float(scale), pos, val, ang)


def maxima_mask_1d(coeffs, eps_floor: float = EPS_FLOOR) -> np.ndarray:
    """Boolean mask of 1-D modulus maxima along the last axis.

    Interior samples with ``|c[u]| > |c[u-1]|`` and ``|c[u]| >= |c[u+1]|``
    above ``eps_floor * max|c|`` (per row) qualify; plateaus keep their
    leftmost sample.
    """
    c = np.abs(np.asarray(coeffs, dtype=np.float64))
    mask = np.zeros(c.shape, dtype=bool)
    mid = c[..., 1:-1]
    mask[..., 1:-1] = (mid > c[..., :-2]) & (mid >= c[..., 2:])
    floor = eps_floor * c.max(axis=-1, keepdims=True)
    mask &= c > floor
    return mask


def maxima_set_1d(plane: WaveletPlane1D, eps_floor: float = EPS_FLOOR) -> MaximaSet:
    idx = np.flatnonzero(maxima_mask_1d(plane.coeffs, eps_floor))
    return MaximaSet(plane.scale, idx.astype(np.float64), np.asarray(plane.coeffs)[idx].copy())


def maxima_set_rows(coeffs: np.ndarray, scale: float, eps_floor: float = EPS_FLOOR) -> MaximaSet:
    """1-D maxima of every row of a coefficient array, batched."""
    c = np.asarray(coeffs)
    rows, cols = np.nonzero(maxima_mask_1d(c, eps_floor))
    return MaximaSet(float(scale), cols.astype(np.float64), c[rows, cols].copy(), None, rows)


def detect1d(plane: WaveletPlane1D) -> list[ModMax]:
    """Local maxima of ``|Wf(., s)|``, sorted by position."""
    return maxima_set_1d(plane).to_list()


_DIRS = np.array([[0, 1], [1, 1], [1, 0], [1, -1]])


def _nms_mask(mod: np.ndarray, ang: np.ndarray, candidates: np.ndarray, interpolate: bool) -> np.ndarray:
    rows, cols = np.nonzero(candidates)
    m = mod[rows, cols]
    a = ang[rows, cols]
    if interpolate:
        dy, dx = np.sin(a), np.cos(a)
        fwd = ndimage.map_coordinates(mod, [rows + dy, cols + dx], order=1, mode="nearest")
        bwd = ndimage.map_coordinates(mod, [rows - dy, cols - dx], order=1, mode="nearest")
    else:
        sector = np.round(np.mod(a, np.pi) / (np.pi / 4)).astype(int) % 4
        d = _DIRS[sector]
        r1 = np.clip(rows + d[:, 0], 0, mod.shape[0] - 1)
        c1 = np.clip(cols + d[:, 1], 0, mod.shape[1] - 1)
        r2 = np.clip(rows - d[:, 0], 0, mod.shape[0] - 1)
        c2 = np.clip(cols - d[:, 1], 0, mod.shape[1] - 1)
        fwd, bwd = mod[r1, c1], mod[r2, c2]
    keep = (m > fwd) & (m > bwd)
    out = np.zeros(mod.shape, dtype=bool)
    out[rows[keep], cols[keep]] = True
    return out


def maxima_set_2d(
    plane: WaveletPlane2D, eps_floor: float = EPS_FLOOR, interpolate: bool = True
) -> MaximaSet:
    """Directional non-maximum suppression of the modulus.

    A pixel is kept when its modulus strictly exceeds the bilinearly
    interpolated modulus one pixel ahead and behind along the transform
    direction. ``interpolate=False`` uses the faster 8-direction quantized
    comparison instead.
    """
    mod = np.asarray(plane.modulus)
    peak = mod.max() if mod.size else 0.0
    if peak <= 0:
        return MaximaSet(plane.scale, np.zeros((0, 2)), np.zeros(0), np.zeros(0))
    cand = mod > eps_floor * peak
    mask = _nms_mask(mod, np.asarray(plane.angle), cand, interpolate)
    rows, cols = np.nonzero(mask)
    pos = np.column_stack([rows, cols]).astype(np.float64)
    return MaximaSet(plane.scale, pos, mod[rows, cols].copy(), np.asarray(plane.angle)[rows, cols].copy())


def detect2d(plane: WaveletPlane2D, interpolate: bool = True) -> list[ModMax]:
    """Directional local maxima of the 2-D modulus, in row-major order."""
    return maxima_set_2d(plane, interpolate=interpolate).to_list()


@dataclass(frozen=True)
class BoundaryCurve:
    id: int
    points: tuple[ModMax, ...]

    def __len__(self):
        return len(self.points)

    @property
    def positions(self) -> np.ndarray:
        return np.array([p.pos for p in self.points], dtype=np.int64).reshape(-1, 2)


# neighbour offsets, 4-neighbours first so straight runs are preferred
_NEIGH = [(0, 1), (1, 0), (0, -1), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)]


def _wrapped(d: float) -> float:
    return abs((d + math.pi) % (2 * math.pi) - math.pi)


def _as_maxima_set(maxima) -> MaximaSet | None:
    if isinstance(maxima, MaximaSet):
        return maxima if len(maxima) else None
    lst = list(maxima)
    return MaximaSet.from_list(lst) if lst else None


def _chain_lists(ms: MaximaSet, max_turn: float) -> list[list[int]]:
    if ms.angle is None:
        raise ValueError("chaining expects 2-D maxima")
    pos = ms.pos.astype(np.int64)
    order = np.lexsort((pos[:, 1], pos[:, 0]))
    index = {(int(r), int(c)): i for i, (r, c) in enumerate(pos.tolist())}
    ang = ms.angle.tolist()
    pl = pos.tolist()
    used = [False] * len(pl)
    chains = []

    def extend(chain, direction):
        while True:
            cur = chain[-1]
            r, c = pl[cur]
            a0 = ang[cur]
            best, best_cost, best_dir = -1, None, None
            for k, (dr, dc) in enumerate(_NEIGH):
                j = index.get((r + dr, c + dc))
                if j is None or used[j] or _wrapped(ang[j] - a0) >= max_turn:
                    continue
                # 4-neighbours first so two-pixel staircases are absorbed
                if direction is None:
                    cost = (k >= 4, 0.0, k)
                else:
                    dot = (dr * direction[0] + dc * direction[1]) / math.hypot(dr, dc)
                    cost = (k >= 4, -dot, k)
                if best_cost is None or cost < best_cost:
                    best, best_cost, best_dir = j, cost, (dr, dc)
            if best < 0:
                return
            used[best] = True
            chain.append(best)
            direction = best_dir

    for seed in order.tolist():
        if used[seed]:
            continue
        used[seed] = True
        fwd = [seed]
        extend(fwd, None)
        start_dir = None
        if len(fwd) > 1:
            start_dir = (pl[fwd[0]][0] - pl[fwd[1]][0], pl[fwd[0]][1] - pl[fwd[1]][1])
        bwd = [seed]
        extend(bwd, start_dir)
        chains.append(bwd[::-1] + fwd[1:])
    return chains


def chain_curves(maxima: Iterable[ModMax] | MaximaSet, max_turn: float = math.pi / 2) -> list[BoundaryCurve]:
    """Partition 2-D maxima into 8-connected chains.

    Seeds are taken in lexicographic (row, col) order. From the seed the chain
    is extended greedily, first forwards and then backwards, through unused
    8-neighbours whose orientation differs from the current end by less than
    ``max_turn`` (wrapped on the circle). Among several candidates the one
    4-neighbours win over diagonal ones, then the one continuing the current
    direction of travel most closely.
    """
    ms = _as_maxima_set(maxima)
    if ms is None:
        return []
    curves = []
    for chain in _chain_lists(ms, max_turn):
        pts = tuple(
            ModMax((int(ms.pos[i, 0]), int(ms.pos[i, 1])), ms.scale, float(ms.value[i]), angle=float(ms.angle[i]))
            for i in chain
        )
        curves.append(BoundaryCurve(len(curves), pts))
    return curves


def chain_indices(ms: MaximaSet, max_turn: float = math.pi / 2) -> list[np.ndarray]:
    """Like :func:`chain_curves` but returns index arrays into ``ms``."""
    if len(ms) == 0:
        return []
    return [np.asarray(c, dtype=np.int64) for c in _chain_lists(ms, max_turn)]
