"""Maxima-lines of a step and of a two-step staircase.

Run: python demos/step_and_staircase.py
"""
import math

import numpy as np

from wavedge.cwt import cwt1d
from wavedge.filtering import DecisionParams, filter_schedule, oracle_links
from wavedge.patterns import PatternSpec, critical_scale, find_modmax, synthesize

# A single step: one mod-max at the edge, growing like sqrt(s).
f = np.zeros(1024)
f[512:] = 1.0
print("step edge at 512")
for s in (4, 8, 16, 32):
    w = cwt1d(f, s).coeffs
    print(f"  s={s:2d}  W(512)={w[512]:.5f}  closed form={math.sqrt(2 * s) * math.pi ** -0.25:.5f}")

(line,) = filter_schedule(f, [32, 16, 8, 4], DecisionParams(0.0))
print("  maxima-line:", [(e.scale, e.pos) for e in line.entries])

# Two steps one unit apart. With equal heights both lines meet at s = 1/2,
# otherwise the smaller step's line is short and ends at a fold.
for A in (1.0, 1.25):
    spec = PatternSpec(3, A=A, strict=False)
    c = critical_scale(spec)
    below = len(find_modmax(spec, 0.95 * c.s_star))
    above = len(find_modmax(spec, 1.05 * c.s_star))
    print(f"\nstaircase A={A}: s*={c.s_star:.4f} at u={c.u_star:.4f}; mod-max {below} below, {above} above")

    # the same pattern on a pixel grid, 32 pixels per unit, tracked densely
    g = synthesize(spec.with_params(unit=32), 1024, 400.0)
    for ln in oracle_links(g, 32, 2, "1d").lines():
        first, last = ln.entries[0], ln.entries[-1]
        print(f"  line {ln.id}: s {first.scale:>4} -> {last.scale:<4} pos {first.pos} -> {last.pos}")
