"""
Searching for a point with two competing limits
===============================================

Glue blocks of 0s and 1s so that the prefixes of the point look, in turn,
like the fixed point ``000...`` (limit parameter ``w``) and the fixed point
``111...`` (parameter ``1 - w``). The search grows each block until the
count law of the whole prefix is close to the intended limit.

With Bernoulli(0.3, 0.7) this stalls at the second block: a prefix
``0^a 1^b`` has no self-overlap, so its count law tends to the Poisson law
rather than to either compound law.
"""

from cpreturns import OscillationSpec, run_oscillation

res = run_oscillation(OscillationSpec(w=0.3, t0=1.0, r0=2, n_max=30, blocks=4))
s = res.summary
print("epsilon", s["epsilon"], " verdict", s["verdict"])
print("stopped:", s["stopped"])

# %%
# Distances of every candidate prefix to the two compound laws.
for row in s["trace"]:
    print(f"block {row['block']} n = {row['n']:2d}  sup to p1 {row['sup_p1']:.4f}  "
          f"sup to p2 {row['sup_p2']:.4f}")
