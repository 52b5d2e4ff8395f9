"""Where does the sparse filter stop connecting a pattern correctly?

Q1 and Q0 are the worst-case margins of the decision function over a sweep
of dyadic scale pairs; both positive means every connection is right.
Run: python demos/reliability_margins.py   (about half a minute)
"""
import numpy as np

from wavedge.patterns import PatternSpec, amplitude_threshold, critical_amplitude, q_geometry, q_values

# Staircase: how large must the second step be?
As = np.linspace(1.0, 2.0, 101)
for crit in ("distance", "decay", "full"):
    q = []
    for A in As:
        geo = q_geometry(PatternSpec(3, A=float(A), strict=False), 50)
        q.append(min(q_values(None, 0.0, crit, geometry=geo)))
    q = np.array(q)
    first = As[np.argmax(q > 0)]
    print(f"staircase, {crit:8s}: Q > 0 from A ~ {first:.3f}")

# Step plus a negative step further out: the largest B that still works,
# for each alpha. A negative alpha leans on the decay factor.
spec = PatternSpec(4, A=2.0, B=0.5, beta=1.6)
b_star = critical_amplitude(spec)
grid = np.linspace(0.05, 0.95 * b_star, 60)
print(f"\ntriplet A=2, beta=1.6: topology changes at B* = {b_star:.3f}")
for alpha in (-0.5, 0.0, 0.5):
    b = amplitude_threshold(spec, "B", grid, alpha=alpha, side="below")
    print(f"  alpha={alpha:+.1f}: works up to B = {b:.3f}")
b = amplitude_threshold(spec, "B", grid, criterion="distance", side="below")
print(f"  distance only: works up to B = {b:.3f}")
