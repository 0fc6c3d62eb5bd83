"""
Entry counts at a fixed point converge to the compound law
=========================================================

For the Bernoulli(0.3, 0.7) shift and the cylinders ``0^n`` around the
fixed point ``000...``, the exact count of visits within ``t / mu(0^n)``
steps approaches the Polya-Aeppli law with ``p = 0.3``. The error decays
geometrically in ``n``.
"""

from cpreturns import (DistParams, MeasureSpec, ShiftSystem, exact_entry_distribution,
                       fit_convergence_rate, limit_distribution, make_target, total_variation)

system = ShiftSystem.full(2)
measure = MeasureSpec.bernoulli([0.3, 0.7])
limit = limit_distribution(DistParams(1.0, 0.3), 10)

# %%
# Exact laws by transfer-matrix powering, then total variation to the limit.
tv = []
for n in range(4, 13):
    target = make_target(system, measure, "0", n=n)
    d = exact_entry_distribution(system, measure, target, 1.0, 10)
    tv.append((n, total_variation(d, limit, 10)))
    print(f"n = {n:2d}  tau = {target.tau(1.0):8d}  TV = {tv[-1][1]:.3e}")

# %%
# Slope of log TV against n. ``exp(slope)`` sits close to 0.3 = mu(0).
rate, r2 = fit_convergence_rate(tv)
print(f"slope {rate:.3f}, r^2 {r2:.4f}")
