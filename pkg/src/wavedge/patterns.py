"""Model edge patterns and their maxima-line geometry.

Every pattern is a sum of Heaviside steps ``sum_i c_i H(t - x_i)`` written
in unit coordinates: an edge of height 1 at 0, optionally an edge of
height ``A`` at 1 and an edge of height ``-B`` at ``beta``.

    kind 1   step                 H(t)
    kind 2   impulse              H(t) - B H(t - beta)
    kind 3   staircase            H(t) + A H(t - 1)
    kind 4-6 triplets             H(t) + A H(t - 1) - B H(t - beta)

Kinds 4 and 5 share the formula and differ in which maxima-line is short
(kind 4: the line at 0, kind 5: the line at 1); kind 6 has ``0 < beta < 1``.

For a Heaviside sum the transform is a sum of Gaussian bumps,

    Wf(u, s) = sqrt(2 s) pi**-0.25 sum_i c_i exp(-(u - x_i)**2 / (2 s**2)),

and for the Gaussian-smoothed pattern ``h = f * g_sigma``

    Wh(u, s) = (s / s')**1.5 Wf(u, s'),    s' = sqrt(s**2 + sigma**2).

All mod-max geometry is therefore computed on the effective scale ``s'``.
Derivatives in ``u`` are Hermite functions, which keeps the root finding and
the Newton systems analytic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.special import ndtr

from .filtering import CRITERIA, DecisionParams, decision_terms

__all__ = [
    "PatternSpec",
    "CriticalValues",
    "ConvergenceError",
    "QGeometry",
    "QSurface",
    "synthesize",
    "analytic_wt",
    "pixel_wt",
    "find_modmax",
    "critical_points",
    "critical_scale",
    "critical_amplitude",
    "smoothed_decay_center",
    "q_geometry",
    "q_values",
    "q_surface",
    "amplitude_threshold",
    "level_curve",
]

PSI_NORM = math.sqrt(2.0) * math.pi ** -0.25
WINDOW = 8.0  # half-width of the root search window around each edge, in scales
STEP = 1.0 / 50.0  # scan step as a fraction of the scale
XTOL = 1e-11


class ConvergenceError(RuntimeError):
    """A root finder or Newton iteration failed to converge."""


@dataclass(frozen=True)
class PatternSpec:
    """Model-edge descriptor.

    ``unit`` is the number of pixels per model unit and only matters for
    :func:`synthesize` and :func:`pixel_wt`. With ``strict=False`` the
    per-kind parameter ranges are relaxed to positivity so degenerate cases
    (for example kind 3 with ``A <= 1``) can be studied.
    """

    kind: int
    A: float = 0.0
    B: float = 0.0
    beta: float = 0.0
    sigma: float = 0.0
    unit: float = 16.0
    strict: bool = True

    def __post_init__(self):
        k = self.kind
        if k not in (1, 2, 3, 4, 5, 6):
            raise ValueError(f"pattern kind must be 1..6, got {k}")
        for name in ("A", "B", "beta", "sigma", "unit"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not self.unit > 0:
            raise ValueError("unit must be positive")
        A, B, b = self.A, self.B, self.beta
        if k == 2 and not (B > 0 and b > 0):
            raise ValueError("kind 2 needs B > 0 and beta > 0")
        if k >= 3 and not A > 0:
            raise ValueError(f"kind {k} needs A > 0")
        if k in (4, 5, 6) and not B > 0:
            raise ValueError(f"kind {k} needs B > 0")
        if k in (4, 5) and not b > 1:
            raise ValueError(f"kind {k} needs beta > 1")
        if k == 6 and not 0 < b < 1:
            raise ValueError("kind 6 needs 0 < beta < 1")
        if self.strict:
            if k in (3, 4) and not A > 1:
                raise ValueError(f"kind {k} needs A > 1 (pass strict=False to relax)")

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge positions and signed jump heights, in unit coordinates."""
        k = self.kind
        if k == 1:
            pts = [(0.0, 1.0)]
        elif k == 2:
            pts = [(0.0, 1.0), (self.beta, -self.B)]
        elif k == 3:
            pts = [(0.0, 1.0), (1.0, self.A)]
        else:
            pts = [(0.0, 1.0), (1.0, self.A), (self.beta, -self.B)]
        xs = np.array([p[0] for p in pts])
        cs = np.array([p[1] for p in pts])
        return xs, cs

    @property
    def amplitude_name(self) -> str | None:
        """Parameter whose critical value transforms the pattern."""
        return {4: "B", 5: "A", 6: "A"}.get(self.kind)

    def with_params(self, **kw) -> "PatternSpec":
        return replace(self, **kw)


@dataclass(frozen=True)
class CriticalValues:
    """Appearance scale of the short maxima-line and where it appears."""

    s_star: float
    u_star: float
    value: float
    short: int  # 0 if the line at 0 is short, 1 if the line at 1 is
    amp_star: float | None = None


# ---------------------------------------------------------------------------
# Signals


def synthesize(spec: PatternSpec, length: int, origin: float) -> np.ndarray:
    """Pixel samples of a pattern, edge at 0 placed at pixel ``origin``.

    Sample ``k`` is the mean of the (possibly smoothed) pattern over the cell
    ``[k, k + 1)``, so edges at integer pixel positions give exact steps.
    """
    xs, cs = spec.edges()
    span = max(1.0, float(xs.max()))
    lo, hi = origin, origin + spec.unit * span
    if not (0 < lo < length and 0 < hi < length):
        raise ValueError(f"edges [{lo}, {hi}] are not interior to [0, {length})")
    p = origin + spec.unit * xs
    k = np.arange(length, dtype=np.float64)
    out = np.zeros(length)
    sig = spec.sigma * spec.unit
    for pi_, ci in zip(p, cs):
        if sig < 1e-9:
            out += ci * np.clip(k + 1 - pi_, 0.0, 1.0)
        else:
            out += ci * _cell_mean(k - pi_, sig)
    return out


def _psi_int(z):
    # antiderivative of the normal cdf
    return z * ndtr(z) + np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


def _cell_mean(a, sig):
    """Mean of the smoothed unit step over ``[a, a + 1]``."""
    z0, z1 = a / sig, (a + 1) / sig
    # psi(z) = z + psi(-z) keeps the right tail free of cancellation
    right = 1.0 + sig * (_psi_int(-z1) - _psi_int(-z0))
    left = sig * (_psi_int(z1) - _psi_int(z0))
    return np.where(a >= 0, right, left)


# ---------------------------------------------------------------------------
# Closed-form transform


def _hermite(n: int, z):
    """(-1)**n He_n(z) exp(-z**2 / 2), the n-th derivative of exp(-z**2 / 2)."""
    e = np.exp(-0.5 * z * z)
    if n == 0:
        return e
    if n == 1:
        return -z * e
    if n == 2:
        return (z * z - 1) * e
    if n == 3:
        return -(z ** 3 - 3 * z) * e
    if n == 4:
        return (z ** 4 - 6 * z * z + 3) * e
    raise ValueError("derivative order above 4 not supported")


def _H(n, u, t, xs, cs):
    """t**n d^n/du^n of sum_i c_i exp(-(u - x_i)**2 / 2t**2), broadcast over u, t."""
    u = np.asarray(u, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    z = (u[..., None] - xs) / t[..., None]
    return (cs * _hermite(n, z)).sum(-1)


def _dH_dt(n, u, t, xs, cs):
    u = np.asarray(u, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    z = (u[..., None] - xs) / t[..., None]
    return -(cs * z * _hermite(n + 1, z)).sum(-1) / t


def _effective(s, sigma):
    return np.sqrt(np.asarray(s, dtype=np.float64) ** 2 + sigma * sigma)


def _amplitude(s, t):
    """Prefactor turning the Gaussian sum at scale t into Wh at scale s."""
    return PSI_NORM * np.asarray(s) ** 1.5 / np.asarray(t)


def analytic_wt(spec: PatternSpec, u, s, order: int = 0):
    """Closed-form transform (or its ``order``-th u-derivative), unit coordinates.

    ``u`` and ``s`` broadcast against each other.
    """
    xs, cs = spec.edges()
    s = np.asarray(s, dtype=np.float64)
    if np.any(s <= 0):
        raise ValueError("scale must be positive")
    t = _effective(s, spec.sigma)
    u = np.asarray(u, dtype=np.float64)
    u, t, s = np.broadcast_arrays(u, t, s)
    val = _amplitude(s, t) * _H(order, u, t, xs, cs) / t ** order
    return val if val.ndim else float(val)


def pixel_wt(spec: PatternSpec, u, s, origin: float):
    """Closed-form transform at pixel position ``u`` and pixel scale ``s``.

    Matches ``cwt1d(synthesize(spec, n, origin), s)`` up to discretization.
    """
    L = spec.unit
    return math.sqrt(L) * analytic_wt(spec, (np.asarray(u, dtype=np.float64) - origin) / L, np.asarray(s) / L)


# ---------------------------------------------------------------------------
# Root finding


def _search_grid(xs, t, frac):
    h = t * frac
    lo = np.sort(xs) - WINDOW * t
    hi = np.sort(xs) + WINDOW * t
    segs = []
    a, b = lo[0], hi[0]
    for l, r in zip(lo[1:], hi[1:]):
        if l <= b:
            b = max(b, r)
        else:
            segs.append((a, b))
            a, b = l, r
    segs.append((a, b))
    return [a + h * np.arange(int(math.ceil((b - a) / h)) + 1) for a, b in segs]


@dataclass(frozen=True)
class _Roots:
    pos: np.ndarray
    g: np.ndarray  # Gaussian-sum value at the root
    is_max: np.ndarray


def _roots_many(xs, cs, ts, frac=STEP) -> list[_Roots]:
    """All roots of the u-derivative at each effective scale in ``ts``.

    Sign changes are located on a grid of step ``frac * t`` inside windows
    around the edges and refined by vectorized bisection.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    us, tid, seg = [], [], []
    nseg = 0
    for k, t in enumerate(ts):
        for g in _search_grid(xs, t, frac):
            us.append(g)
            tid.append(np.full(g.size, k))
            seg.append(np.full(g.size, nseg))
            nseg += 1
    u = np.concatenate(us)
    ti = np.concatenate(tid)
    sg = np.concatenate(seg)
    tv = ts[ti]
    pos = _H(1, u, tv, xs, cs) > 0
    change = (pos[:-1] != pos[1:]) & (sg[:-1] == sg[1:])
    idx = np.flatnonzero(change)
    a, b = u[idx].copy(), u[idx + 1].copy()
    t_r = tv[idx]
    left_pos = pos[idx]
    width = float((b - a).max()) if idx.size else 0.0
    iters = int(min(60, max(1, math.ceil(math.log2(max(width, XTOL) / XTOL)))))
    for _ in range(iters):
        m = 0.5 * (a + b)
        same = (_H(1, m, t_r, xs, cs) > 0) == left_pos
        a = np.where(same, m, a)
        b = np.where(same, b, m)
    r = 0.5 * (a + b)
    g = _H(0, r, t_r, xs, cs)
    floor = 1e-9 * np.abs(cs).sum()
    # |W| rises before the root iff the derivative has the sign of W there
    is_max = (left_pos == (g > 0)) & (np.abs(g) > floor)
    owner = ti[idx]
    out = []
    for k in range(ts.size):
        sel = owner == k
        out.append(_Roots(r[sel], g[sel], is_max[sel]))
    return out


def critical_points(spec: PatternSpec, s: float):
    """All roots of the u-derivative at scale ``s``: ``(positions, is_max)``."""
    xs, cs = spec.edges()
    t = float(_effective(s, spec.sigma))
    roots = _roots_many(xs, cs, [t])[0]
    return roots.pos, roots.is_max


def find_modmax(spec: PatternSpec, s: float) -> list[tuple[float, float]]:
    """Mod-max ``(position, value)`` of the closed-form transform, unit coordinates.

    Roots of the u-derivative are bracketed on a grid of step ``s'/50`` and
    bisected to ``1e-11``; only local maxima of ``|Wf|`` are returned,
    sorted by position.
    """
    if not s > 0:
        raise ValueError("scale must be positive")
    xs, cs = spec.edges()
    t = float(_effective(s, spec.sigma))
    roots = _roots_many(xs, cs, [t])[0]
    amp = float(_amplitude(s, t))
    return [(float(p), amp * float(g)) for p, g, m in zip(roots.pos, roots.g, roots.is_max) if m]


def _positive_counts(xs, cs, ts):
    return np.array([int(np.count_nonzero(r.is_max & (r.g > 0))) for r in _roots_many(xs, cs, ts)])


# ---------------------------------------------------------------------------
# Newton systems


def _damped_newton(F: Callable, J: Callable, x0, tol=1e-12, maxit=60):
    x = np.asarray(x0, dtype=np.float64)
    f = F(x)
    norm = np.linalg.norm(f)
    for _ in range(maxit):
        if norm < tol:
            return x
        step = np.linalg.lstsq(J(x), -f, rcond=None)[0]
        lam = 1.0
        while lam > 1e-4:
            xn = x + lam * step
            if np.all(np.isfinite(xn)) and xn[1] > 0:
                fn = F(xn)
                nn = np.linalg.norm(fn)
                if nn < norm:
                    break
            lam *= 0.5
        else:
            break
        x, f, norm = xn, fn, nn
    if norm < tol * 1e3:
        return x
    raise ConvergenceError(f"Newton iteration stalled at residual {norm:.3e}")


def _fold_system(xs, cs):
    def F(v):
        return np.array([_H(1, v[0], v[1], xs, cs), _H(2, v[0], v[1], xs, cs)])

    def J(v):
        u, t = v
        return np.array(
            [
                [_H(2, u, t, xs, cs) / t, _dH_dt(1, u, t, xs, cs)],
                [_H(3, u, t, xs, cs) / t, _dH_dt(2, u, t, xs, cs)],
            ]
        )

    return F, J


def _fold(xs, cs, scan=(1e-2, 10.0, 100)):
    """Effective scale where the positive mod-max count first drops below 2.

    Returns ``(u, t, short)`` where ``short`` is 0 when the vanishing line
    is the left one.
    """
    span = float(xs.max() - xs.min())
    ts = span * np.geomspace(*scan)
    counts = _positive_counts(xs, cs, ts)
    if counts[0] < 2:
        raise ConvergenceError("fewer than two positive mod-max at the finest scanned scale")
    drop = np.flatnonzero((counts[:-1] >= 2) & (counts[1:] < 2))
    if drop.size == 0:
        raise ConvergenceError("no critical scale found in the scanned range")
    a, b = ts[drop[0]], ts[drop[0] + 1]
    while b / a > 1 + 1e-3:
        m = math.sqrt(a * b)
        if _positive_counts(xs, cs, [m])[0] >= 2:
            a = m
        else:
            b = m
    F, J = _fold_system(xs, cs)
    seeds = []
    for t0 in (a, b):
        r = _roots_many(xs, cs, [t0], frac=STEP / 10)[0]
        order = np.argsort(r.pos)
        p, mx, g = r.pos[order], r.is_max[order], r.g[order]
        pairs = []
        for i in range(p.size - 1):
            if (mx[i] and g[i] > 0) or (mx[i + 1] and g[i + 1] > 0):
                pairs.append((p[i + 1] - p[i], 0.5 * (p[i] + p[i + 1])))
        pairs.sort()
        seeds += [(u0, t0) for _, u0 in pairs[:3]]
    seeds.append((float(xs.mean()), a))
    last = None
    for u0, t0 in seeds:
        try:
            u, t = _damped_newton(F, J, [u0, t0])
        except ConvergenceError as exc:
            last = exc
            continue
        if 0.9 * a <= t <= 1.1 * b:
            below = _roots_many(xs, cs, [t * (1 - 1e-3)], frac=STEP / 10)[0]
            pos = below.pos[below.is_max & (below.g > 0)]
            if pos.size < 2:
                continue
            # the vanishing line is the positive mod-max closest to the fold
            near = pos[np.argmin(np.abs(pos - u))]
            other = pos[np.argmax(np.abs(pos - u))]
            return float(u), float(t), int(near > other)
    raise ConvergenceError(f"critical scale system did not converge from any seed ({last})")


def critical_scale(spec: PatternSpec) -> CriticalValues:
    """Scale at which the short maxima-line appears (kinds 3 to 6).

    Solves ``dW/du = d2W/du2 = 0`` by damped Newton, seeded from a scan of
    the mod-max count. With smoothing the result is converted from the
    effective scale back to the analysis scale.
    """
    if spec.kind not in (3, 4, 5, 6):
        raise ValueError("critical scale is defined for kinds 3 to 6")
    xs, cs = spec.edges()
    u, t, short = _fold(xs, cs)
    if t <= spec.sigma:
        raise ConvergenceError("smoothing exceeds the critical scale; the short line never appears")
    s = math.sqrt(t * t - spec.sigma ** 2)
    value = float(_amplitude(s, t) * _H(0, u, t, xs, cs))
    return CriticalValues(s, u, value, short)


def _cusp_indicator(spec: PatternSpec) -> float:
    xs, cs = spec.edges()
    u, t, _ = _fold(xs, cs)
    return float(_H(3, u, t, xs, cs) / np.abs(cs).sum())


def critical_amplitude(spec: PatternSpec, lo: float = 0.05, hi: float = 50.0) -> float:
    """Transformation amplitude: ``B*`` for kind 4, ``A*`` for kinds 5 and 6.

    At this amplitude the first three u-derivatives vanish together (the
    coarse line trifurcates). The amplitude is bracketed by the sign change
    of the third derivative at the fold and polished by Newton on the full
    three-equation system.
    """
    name = spec.amplitude_name
    if name is None:
        raise ValueError("critical amplitude is defined for kinds 4, 5 and 6")
    loose = replace(spec, strict=False, sigma=0.0)

    def g(v):
        try:
            return _cusp_indicator(replace(loose, **{name: v}))
        except ConvergenceError:
            return math.nan

    grid = np.geomspace(lo, hi, 48)
    vals = np.array([g(v) for v in grid])
    ok = np.isfinite(vals)
    hit = [i for i in range(grid.size - 1) if ok[i] and ok[i + 1] and vals[i] * vals[i + 1] < 0]
    if not hit:
        raise ConvergenceError(f"no transformation amplitude for {name} in [{lo}, {hi}]")
    i = hit[0]
    try:
        v0 = optimize.brentq(g, grid[i], grid[i + 1], xtol=1e-10)
    except ValueError as exc:  # fold lost inside the bracket
        raise ConvergenceError(str(exc)) from exc
    return _polish_cusp(loose, name, v0)


def _polish_cusp(spec: PatternSpec, name: str, v0: float) -> float:
    xs, cs = replace(spec, **{name: v0}).edges()
    idx = 1 if name == "A" else 2
    sgn = 1.0 if name == "A" else -1.0
    u0, t0, _ = _fold(xs, cs)

    def edges(v):
        c = cs.copy()
        c[idx] = sgn * v
        return c

    def F(x):
        u, t, v = x
        c = edges(v)
        return np.array([_H(n, u, t, xs, c) for n in (1, 2, 3)])

    def J(x):
        u, t, v = x
        c = edges(v)
        unit = np.zeros_like(c)
        unit[idx] = sgn
        return np.array(
            [[_H(n + 1, u, t, xs, c) / t, _dH_dt(n, u, t, xs, c), _H(n, u, t, xs, unit)] for n in (1, 2, 3)]
        )

    x = _damped_newton(F, J, [u0, t0, v0], tol=1e-11)
    if not abs(x[2] - v0) <= 1e-3 * abs(v0):
        raise ConvergenceError("cusp polish moved away from the bracketed amplitude")
    return float(x[2])


def smoothed_decay_center(ratio: float) -> float:
    """Decay exponent of a smoothed step between scales ``s1`` and ``ratio * s1``.

    Valid when the effective scales ``sqrt(s**2 + sigma**2)`` differ by a
    factor 2. Reduces to 1/2 when ``ratio == 2`` (no smoothing).
    """
    ratio = np.asarray(ratio, dtype=np.float64)
    out = 1.5 - math.log(2.0) / np.log(ratio)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Reliability analysis


@dataclass(frozen=True)
class QGeometry:
    """Mod-max of the long and short maxima-lines along a scale sweep.

    Effective scales ``t`` run from ``0.02 t*`` up to ``t*`` inclusive. The
    long-line inequality compares ``long(2t)`` with ``long(t)`` (true) and
    ``short(t)`` (wrong); the short-line inequality compares ``short(t)``
    with ``short(t/2)`` (true) and ``long(t/2)`` (wrong). At ``t*`` the
    short line is represented by the fold point itself. Positions are in
    unit coordinates and values are transform values.
    """

    crit: CriticalValues
    sigma: float
    t: np.ndarray
    scale: Callable = field(repr=False, compare=False, default=None)
    long_coarse: tuple = ()  # at 2t
    long_mid: tuple = ()  # at t
    short_mid: tuple = ()  # at t
    long_fine: tuple = ()  # at t/2
    short_fine: tuple = ()  # at t/2


def _lines_at(xs, cs, ts, short, u_star=None):
    """(long, short) positive mod-max at each effective scale; NaN when absent."""
    roots = _roots_many(xs, cs, ts)
    L = np.full((ts.size, 2), np.nan)  # columns: pos, g
    S = np.full((ts.size, 2), np.nan)
    bad = []
    for k, r in enumerate(roots):
        sel = r.is_max & (r.g > 0)
        p, g = r.pos[sel], r.g[sel]
        order = np.argsort(p)
        p, g = p[order], g[order]
        if p.size == 2:
            i_short = 0 if short == 0 else 1
            S[k] = p[i_short], g[i_short]
            L[k] = p[1 - i_short], g[1 - i_short]
        elif p.size == 1:
            L[k] = p[0], g[0]
        else:
            bad.append(k)
    if bad:
        dense = _roots_many(xs, cs, ts[bad], frac=STEP / 20)
        for k, r in zip(bad, dense):
            sel = r.is_max & (r.g > 0)
            p, g = r.pos[sel], r.g[sel]
            if p.size not in (1, 2):
                raise ConvergenceError(f"{p.size} positive mod-max at effective scale {ts[k]:.4g}")
            order = np.argsort(p)
            p, g = p[order], g[order]
            if p.size == 2:
                S[k] = p[short], g[short]
                L[k] = p[1 - short], g[1 - short]
            else:
                L[k] = p[0], g[0]
    return L, S


def q_geometry(spec: PatternSpec, n_scales: int = 50, lowest: float = 0.02) -> QGeometry:
    """Sweep geometry for the reliability inequalities of a pattern."""
    crit = critical_scale(spec)
    xs, cs = spec.edges()
    sig = spec.sigma
    t_star = math.hypot(crit.s_star, sig)
    t = t_star * np.geomspace(lowest, 1.0, n_scales)
    t[-1] = t_star
    short = crit.short
    Lc, _ = _lines_at(xs, cs, 2 * t, short)
    Lm, Sm = _lines_at(xs, cs, t, short)
    Lf, Sf = _lines_at(xs, cs, t / 2, short)
    # at the critical scale the short line is the fold point and the long
    # line is the positive mod-max farthest from it
    u_star = crit.u_star
    r = _roots_many(xs, cs, [t_star])[0]
    sel = r.is_max & (r.g > 0)
    p, g = r.pos[sel], r.g[sel]
    j = int(np.argmax(np.abs(p - u_star)))
    Lm[-1] = p[j], g[j]
    Sm[-1] = u_star, _H(0, u_star, t_star, xs, cs)
    if np.isnan(Sm[:-1]).any() or np.isnan(Sf).any():
        raise ConvergenceError("short line missing below the critical scale")

    def scale(tt):
        return np.sqrt(np.maximum(tt * tt - sig * sig, 0.0))

    return QGeometry(crit, sig, t, scale, tuple(Lc.T), tuple(Lm.T), tuple(Sm.T), tuple(Lf.T), tuple(Sf.T))


def _q_from_geometry(geo: QGeometry, params: DecisionParams, unit: float):
    t = geo.t
    sig = geo.sigma
    s = geo.scale

    def W(line, tt):
        return _amplitude(s(tt), tt) * line[1] * math.sqrt(unit)

    def side(n, n_t, true, wrong, fine_t):
        s2, s1 = s(n_t), s(fine_t)
        valid = s1 > 0
        s2v, s1v = s2[valid] * unit, s1[valid] * unit
        if params.decay_center is not None:
            center = params.decay_center
        elif sig == 0:
            center = 0.5
        else:
            center = smoothed_decay_center(s2v / s1v)
        wn = W(n, n_t)[valid]
        out = []
        for m in (true, wrong):
            d = np.abs(n[0] - m[0])[valid] * unit
            delta, decay = decision_terms(d, wn, W(m, fine_t)[valid], s2v, s1v, params.alpha, center)
            if params.criterion == "distance":
                out.append(delta)
            elif params.criterion == "decay":
                out.append(decay)
            else:
                out.append(delta * decay)
        diff = out[0] - out[1]
        return float(diff.min()) if diff.size else math.nan

    q_long = side(geo.long_coarse, 2 * t, geo.long_mid, geo.short_mid, t)
    q_short = side(geo.short_mid, t, geo.short_fine, geo.long_fine, t / 2)
    if geo.crit.short == 0:
        return q_long, q_short  # (Q1, Q0)
    return q_short, q_long


def q_values(
    spec: PatternSpec,
    alpha: float = 0.0,
    criterion: str = "full",
    n_scales: int = 50,
    unit: float = 1.0,
    decay_center: float | None = None,
    geometry: QGeometry | None = None,
) -> tuple[float, float]:
    """Minimum margins ``(Q1, Q0)`` of the reliability inequalities.

    ``Q1`` belongs to the maxima-line of the edge at 1, ``Q0`` to the line
    of the edge at 0. Both positive means the decision function connects the
    pattern's mod-max correctly at every sampled dyadic scale pair. ``unit``
    rescales distances and scales (for example to pixels); ``criterion``
    selects the full product or one factor.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    geo = geometry if geometry is not None else q_geometry(spec, n_scales)
    params = DecisionParams(alpha=alpha, decay_center=decay_center, criterion=criterion)
    return _q_from_geometry(geo, params, unit)


@dataclass(frozen=True)
class QSurface:
    axes: dict
    q1: np.ndarray
    q0: np.ndarray

    @property
    def q_min(self) -> np.ndarray:
        return np.minimum(self.q1, self.q0)


_DEFAULTS = {
    3: dict(A=2.0),
    4: dict(A=2.0, B=0.5, beta=1.6),
    5: dict(A=0.5, B=3.0, beta=1.6),
    6: dict(A=2.0, B=1.0, beta=0.5),
}


def _base_spec(kind, base: PatternSpec | None, **kw):
    if base is None:
        params = dict(_DEFAULTS[kind])
        params.update(kw)
        return PatternSpec(kind, strict=False, **params)
    return replace(base, strict=False, **kw)


def q_surface(
    kind: int,
    alpha: float,
    grid: dict,
    criterion: str = "full",
    n_scales: int = 50,
    base: PatternSpec | None = None,
) -> QSurface:
    """``(Q1, Q0)`` on the Cartesian product of the parameter axes in ``grid``.

    ``grid`` maps parameter names (``"A"``, ``"B"``, ``"beta"``, ``"sigma"``)
    to 1-D arrays; other parameters come from ``base`` or per-kind defaults.
    Points where the geometry cannot be computed are NaN.
    """
    if kind not in (3, 4, 5, 6):
        raise ValueError("Q analysis is defined for kinds 3 to 6")
    names = list(grid)
    axes = {k: np.asarray(grid[k], dtype=np.float64) for k in names}
    shape = tuple(a.size for a in axes.values())
    q1 = np.full(shape, np.nan)
    q0 = np.full(shape, np.nan)
    for idx in np.ndindex(*shape):
        kw = {n: float(axes[n][i]) for n, i in zip(names, idx)}
        try:
            spec = _base_spec(kind, base, **kw)
            q1[idx], q0[idx] = q_values(spec, alpha, criterion, n_scales)
        except (ValueError, ConvergenceError):
            continue
    return QSurface(axes, q1, q0)


def _select(which):
    if which == "min":
        return lambda q: min(q)
    if which == "q1":
        return lambda q: q[0]
    if which == "q0":
        return lambda q: q[1]
    raise ValueError("which must be 'min', 'q1' or 'q0'")


def amplitude_threshold(
    spec: PatternSpec,
    name: str,
    values: Sequence[float],
    alpha: float = 0.0,
    criterion: str = "full",
    n_scales: int = 50,
    side: str = "above",
    which: str = "min",
    unit: float = 1.0,
    refine: bool = True,
) -> float:
    """Boundary of the region where the chosen Q is positive along one parameter.

    ``side="above"`` returns the smallest value beyond which Q stays positive
    on the grid ``values`` (for example the minimal ``A`` of kind 3);
    ``side="below"`` the largest value up to which it stays positive (for
    example the maximal working ``B`` of kind 4). The crossing is linearly
    interpolated on the grid and then refined with Brent's method. Returns
    NaN if Q is never positive at the relevant end and the grid end if it
    never turns negative.
    """
    pick = _select(which)
    values = np.asarray(values, dtype=np.float64)
    if side not in ("above", "below"):
        raise ValueError("side must be 'above' or 'below'")

    def q(v):
        try:
            sp = replace(spec, strict=False, **{name: float(v)})
            return pick(q_values(sp, alpha, criterion, n_scales, unit))
        except (ValueError, ConvergenceError):
            return math.nan

    qs = np.array([q(v) for v in values])
    vals, seq = (values, qs) if side == "below" else (values[::-1], qs[::-1])
    if not seq[0] > 0:
        return math.nan
    neg = np.flatnonzero(~(seq > 0))
    if neg.size == 0:
        return float(vals[-1])
    i = neg[0]
    a, b, qa, qb = vals[i - 1], vals[i], seq[i - 1], seq[i]
    guess = a + (b - a) * qa / (qa - qb) if np.isfinite(qb) else b
    if not (refine and np.isfinite(qb)):
        return float(guess)
    try:
        return float(optimize.brentq(q, a, b, xtol=1e-6 * max(1.0, abs(guess))))
    except (ValueError, ConvergenceError):
        return float(guess)


def level_curve(
    kind: int,
    alpha: float,
    x_name: str,
    x_values: Sequence[float],
    y_name: str,
    y_values: Sequence[float],
    criterion: str = "full",
    which: str = "min",
    side: str = "below",
    base: PatternSpec | None = None,
    n_scales: int = 50,
) -> np.ndarray:
    """Points ``(x, y)`` on the level set ``Q = 0`` of a two-parameter slice.

    For every ``x`` the threshold in ``y`` is located with
    :func:`amplitude_threshold`; rows where no crossing exists are dropped.
    """
    pts = []
    for x in x_values:
        try:
            spec = _base_spec(kind, base, **{x_name: float(x)})
            y = amplitude_threshold(spec, y_name, y_values, alpha, criterion, n_scales, side, which)
        except (ValueError, ConvergenceError):
            continue
        if np.isfinite(y):
            pts.append((float(x), y))
    return np.array(pts).reshape(-1, 2)
