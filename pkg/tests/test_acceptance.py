"""Acceptance checks, one per criterion.

Each check prints a single ``[C<n>] PASS|FAIL`` line with the measured
numbers, then asserts. Run ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from wavedge.cwt import cwt1d
from wavedge.detector import DetectorParams, canny_baseline, detect_2d
from wavedge.evaluation import (
    PhantomSpec,
    benchmark_phantom,
    default_region_image,
    disk_region_image,
    falseconn_report,
    fom,
    generate_phantom,
)
from wavedge.filtering import DecisionParams, audit, filter_links, oracle_links, transform_levels
from wavedge.modmax import chain_indices
from wavedge.patterns import (
    ConvergenceError,
    PatternSpec,
    amplitude_threshold,
    critical_amplitude,
    critical_scale,
    find_modmax,
    pixel_wt,
    q_geometry,
    q_values,
    synthesize,
)

SCHED = [32, 16, 8, 4]


def _crossing(xs, ys):
    """Linear interpolation of the sign changes of ``ys``."""
    ys = np.asarray(ys)
    idx = np.flatnonzero(np.sign(ys[:-1]) != np.sign(ys[1:]))
    return [xs[i] - ys[i] * (xs[i + 1] - xs[i]) / (ys[i + 1] - ys[i]) for i in idx]


def test_c1_step_closed_form(report):
    t0 = time.perf_counter()
    f = np.zeros(1024)
    f[512:] = 1.0
    errs, peaks = [], []
    u = np.arange(-40, 41)
    for s in (4, 8, 16, 32):
        w = cwt1d(f, s).coeffs
        exact = math.sqrt(2 * s) * math.pi ** -0.25 * np.exp(-(u**2) / (2 * s * s))
        errs.append(np.abs(w[512 + u] - exact).max() / exact.max())
        peaks.append(w[512])
    slope = np.polyfit(np.log([4, 8, 16, 32]), np.log(peaks), 1)[0]
    dt = time.perf_counter() - t0
    ok = max(errs) <= 0.01 and abs(slope - 0.5) <= 0.02 and dt < 1.0
    report(1, ok, f"max rel err {max(errs):.2e} (<= 1e-2), decay slope {slope:.4f} (0.5 +- 0.02), {dt:.3f} s (< 1 s)")


def test_c2_bifurcation_law(report):
    crit = critical_scale(PatternSpec(3, A=1.0, strict=False))
    s = crit.s_star
    merge = len(find_modmax(PatternSpec(3, A=1.0, strict=False), s - 0.005)) == 2
    merge &= len(find_modmax(PatternSpec(3, A=1.0, strict=False), s + 0.005)) == 1
    notes, separate = [], True
    for A in (0.8, 1.25):
        sp = PatternSpec(3, A=A, unit=32, strict=False)
        lines = oracle_links(synthesize(sp, 1024, 400.0), 32, 2, "1d").lines()
        ends = sorted(int(ln.entries[-1].pos) for ln in lines if ln.entries[-1].scale == 2.0)
        merged = any(ln.merged_into is not None for ln in lines)
        long_end = int(max(lines, key=len).entries[-1].pos)
        big = 432 if A > 1 else 400
        separate &= ends == [400, 432] and not merged and long_end == big
        notes.append(f"A={A}: finest ends {ends}, long line ends at {long_end}, merged={merged}")
    ok = abs(s - 0.5) <= 0.01 and merge and separate
    report(2, ok, f"s* = {s:.6f} (0.5 +- 0.01), 2 -> 1 mod-max across s*: {merge}; " + "; ".join(notes))


def test_c3_pattern3_thresholds(report):
    t0 = time.perf_counter()
    As = np.linspace(1.0, 2.0, 200)
    qs = {"distance": [], "decay": [], "full": []}
    for A in As:
        geo = q_geometry(PatternSpec(3, A=float(A), strict=False), 50)
        for crit in qs:
            qs[crit].append(min(q_values(None, 0.0, crit, geometry=geo)))
    dt = time.perf_counter() - t0
    cross = {k: _crossing(As, v) for k, v in qs.items()}
    ranges = {"distance": (1.25, 1.35), "decay": (1.25, 1.35), "full": (1.05, 1.15)}
    ok = dt < 30
    parts = []
    for k, (lo, hi) in ranges.items():
        c = cross[k]
        ok &= len(c) == 1 and lo <= c[0] <= hi
        parts.append(f"{k} {', '.join(f'{v:.4f}' for v in c)} in [{lo}, {hi}]")
    report(3, ok, "; ".join(parts) + f"; {dt:.1f} s (< 30 s)")


def test_c4_pattern4_row(report):
    spec = PatternSpec(4, A=2.0, B=0.5, beta=1.6)
    b_star = critical_amplitude(spec)
    grid = np.linspace(0.05, 0.95 * b_star, 120)
    decay_end = amplitude_threshold(spec, "B", grid, alpha=-0.5, side="below")
    dist_only = amplitude_threshold(spec, "B", grid, alpha=0.0, criterion="distance", side="below")
    ok = abs(decay_end - 4.57) <= 0.10 * 4.57 and abs(dist_only - 0.83) <= 0.15 * 0.83
    report(
        4,
        ok,
        f"alpha=-1/2: B_max {decay_end:.4f} (4.57 +- 10%); distance only: {dist_only:.4f} (0.83 +- 15%); B* {b_star:.4f}",
    )


def test_c5_filter_vs_oracle(report):
    img, _ = generate_phantom(PhantomSpec(default_region_image(), (2.0, 4.0), 0.05, 1))
    oracle = oracle_links(img, 32, 4, mode="rows")
    rates = {a: falseconn_report(img, SCHED, DecisionParams(alpha=a), oracle) for a in (-0.5, 0.0, 0.5)}
    pct = {a: r.overall_pct for a, r in rates.items()}
    ok = all(v <= 10.0 for v in pct.values()) and pct[-0.5] <= pct[0.5]
    detail = ", ".join(f"alpha={a:g}: {v:.2f}% ({rates[a].verified} verified)" for a, v in pct.items())
    report(5, ok, detail + "; ceiling 10%, rate(-1/2) <= rate(1/2)")


def test_c6_fom_ordering(report):
    ok, parts = True, []
    for seed in (1, 2):
        t0 = time.perf_counter()
        img, truth = generate_phantom(benchmark_phantom(seed))
        ours = fom(detect_2d(img, SCHED, DecisionParams(0.0), DetectorParams("robust", 0.1, 0)), truth)
        canny = fom(canny_baseline(img, 4), truth)
        dt = time.perf_counter() - t0
        ok &= ours >= canny and 0.35 <= ours <= 0.75 and 0.35 <= canny <= 0.75 and dt < 60
        parts.append(f"seed {seed}: proposed {ours:.3f} vs canny {canny:.3f} ({dt:.1f} s)")
    report(6, ok, "; ".join(parts) + "; need proposed >= canny, both in [0.35, 0.75]")


BOXES = {
    2: dict(B=(0.2, 3.0), beta=(0.3, 3.0)),
    3: dict(A=(1.0, 5.0)),
    4: dict(A=(1.05, 4.0), B=(0.1, 5.0), beta=(1.1, 3.0)),
    5: dict(A=(0.1, 3.0), B=(0.1, 5.0), beta=(1.1, 3.0)),
    6: dict(A=(0.2, 4.0), B=(0.1, 3.0), beta=(0.1, 0.9)),
}


def _draw(kind, rng, unit):
    """Random spec inside the Q > 0 region (kinds 1 and 2 always qualify)."""
    while True:
        kw = {k: float(rng.uniform(*r)) for k, r in BOXES.get(kind, {}).items()}
        try:
            spec = PatternSpec(kind, unit=unit, **kw)
            if kind < 3 or min(q_values(spec, 0.0, unit=unit)) > 0:
                return spec
        except (ValueError, ConvergenceError):
            pass


def test_c7_pattern_region_exactness(report):
    rng = np.random.default_rng(0)
    p = DecisionParams(0.0)
    false = verified = unverified = 0
    for kind in range(1, 7):
        for _ in range(20):
            spec = _draw(kind, rng, 32.0)
            f = synthesize(spec, 2048, 700.0)
            rep = audit(filter_links(f, SCHED, p, "1d"), oracle_links(f, 32, 4, "1d"))
            false += rep.false
            verified += rep.verified
            unverified += rep.unverified
    ok = false == 0
    report(7, ok, f"120 draws: {false} false of {verified} verified connections ({unverified} unverified)")


def test_c8_subsampling_stability(report):
    rng = np.random.default_rng(0)
    img = disk_region_image((256, 256), 90, 1.0, 0.0) + 0.2 * rng.standard_normal((256, 256))
    levels = transform_levels(img, SCHED, "2d")
    full = detect_2d(img, SCHED, DecisionParams(0.0), DetectorParams("auto", 1.0, 0), levels=levels)
    dom = max(full.scores, key=full.scores.get)
    S = full.scores[dom]
    n_pts = len(chain_indices(levels[-1])[dom])
    rel = np.array(
        [
            abs(detect_2d(img, SCHED, DecisionParams(0.0), DetectorParams("auto", 0.1, k), levels=levels).scores[dom] - S) / S
            for k in range(10)
        ]
    )
    ok = rel.mean() <= 0.15
    report(
        8,
        ok,
        f"dominant curve {n_pts} points; mean |dS|/S over 10 seeds {rel.mean():.3f} (<= 0.15); "
        f"per-seed max {rel.max():.3f} (every-seed reading {'holds' if rel.max() <= 0.15 else 'fails'})",
    )


def test_c9_performance(report):
    img, _ = generate_phantom(PhantomSpec(default_region_image((362, 512)), (2.0, 4.0), 0.05, 0))
    detect_2d(img, SCHED, DecisionParams(0.0), DetectorParams("robust", 0.1, 0))  # warm kernel caches
    times = []
    for _ in range(3):
        t0 = time.perf_counter()
        detect_2d(img, SCHED, DecisionParams(0.0), DetectorParams("robust", 0.1, 0))
        times.append(time.perf_counter() - t0)
    dt = float(np.median(times))
    report(9, dt <= 2.0, f"362x512 detection, 4 scales, fraction 0.1: median {dt:.3f} s of 3 (<= 2 s)")


def test_c10_property_suite(report):
    import test_properties as tp

    checks = [
        tp.test_decision_1d_range_and_sign,
        tp.test_decision_2d_range_and_angle,
        tp.test_modmax_count_nonincreasing,
        tp.test_threshold_monotone_accepted_sets,
        tp.test_seed_determinism,
        tp.test_analytic_matches_quadrature,
    ]
    failed = []
    for check in checks:
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report every failing property
            failed.append(f"{check.__name__}: {type(exc).__name__}")
    # pixel-grid agreement, reported alongside
    worst = {4: 0.0, 8: 0.0}
    for sigma in (0.0, 0.01, 0.015625, 0.03, 0.1):
        for origin in (700.0, 700.5):
            sp = PatternSpec(4, A=2.0, B=0.5, beta=1.6, sigma=sigma, unit=32.0)
            f = synthesize(sp, 2048, origin)
            for s in worst:
                u = np.arange(500, 1000)
                ref = pixel_wt(sp, u, s, origin)
                err = np.abs(cwt1d(f, s).coeffs[u] - ref).max() / np.abs(ref).max()
                worst[s] = max(worst[s], err)
    detail = f"{len(checks) - len(failed)}/{len(checks)} properties hold (closed form vs quadrature)"
    detail += "; pixel grid vs closed form, worst over sub-pixel edge placement: " + ", ".join(
        f"s={s} {100 * w:.2f}%" for s, w in worst.items()
    )
    detail += " of peak (informational)"
    if failed:
        detail += "; failed: " + ", ".join(failed)
    report(10, not failed, detail)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
