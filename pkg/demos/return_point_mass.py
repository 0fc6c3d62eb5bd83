"""
Returns from inside the cylinder
================================

Started inside ``0^n``, the probability of no further visit within time
``t`` tends to ``(1 - p) e^{-t}``. At very small times only the cluster
itself is seen and the count is geometric.
"""

import math

from cpreturns import MeasureSpec, ShiftSystem, exact_return_distribution, make_target

system = ShiftSystem.full(2)
measure = MeasureSpec.bernoulli([0.3, 0.7])
target = make_target(system, measure, "0", n=12)

# %%
for t in (0.01, 0.1, 1.0, 3.0):
    d = exact_return_distribution(system, measure, target, t, 10)
    print(f"t = {t:<5} P(0) = {d.probs[0]:.6f}   (1 - p) e^-t = {0.7 * math.exp(-t):.6f}")

# %%
# Small time: P(r) is close to p^r (1 - p).
d = exact_return_distribution(system, measure, target, 0.01, 10)
for r in range(4):
    print(r, round(float(d.probs[r]), 5), round(0.3 ** r * 0.7, 5))
