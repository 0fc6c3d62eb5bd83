"""
Polya-Aeppli entry and return laws
==================================

The entry-count law with parameters ``(t, p)`` has generating function
``exp(t (z - 1) / (1 - p z))``; the return-count law is the entry law
convolved with a geometric law of success probability ``1 - p``.
"""

import numpy as np

from cpreturns import DistParams, entry_pgf, moments, pmf_array, sample

# %%
# A table of both laws. ``p = 0`` is the Poisson law.
for p in (0.0, 0.3, 0.7):
    prm = DistParams(t=1.0, p=p)
    print(f"p = {p}")
    print("  entry  ", np.round(pmf_array(6, prm, "entry"), 4))
    print("  return ", np.round(pmf_array(6, prm, "return"), 4))

# %%
# Mean and variance agree with the truncated sums.
prm = DistParams(t=2.0, p=0.5)
probs = pmf_array(200, prm)
r = np.arange(probs.size)
print("closed form  ", moments(prm))
print("summed       ", (r @ probs, ((r - r @ probs) ** 2) @ probs))

# %%
# The generating function evaluated at a point, against the pmf.
z = 0.4
print("pgf", entry_pgf(z, prm), "series", probs @ z ** r)

# %%
# Sampling: a compound Poisson draw gives the same frequencies as the pmf.
x = sample(prm, np.random.default_rng(0), size=200_000)
freq = np.bincount(x, minlength=8)[:8] / x.size
print(np.round(freq, 4))
print(np.round(probs[:8], 4))
