"""
Checking the hypotheses on a Markov measure
===========================================

The approximation bound needs an invariant measure, near-independence of
separated hit patterns, and small mass on the rare patterns. A two-state
Markov chain satisfies all three; its mixing coefficient decays at the rate
of the second eigenvalue, here 0.7.
"""

from cpreturns import load_config, validate_config
from cpreturns.experiments import run

cfg = validate_config(load_config("configs/condition_markov.yaml"))
res = run(cfg)
s = res.summary

# %%
print("stationarity residual", s["condition_I"]["stationarity_residual"])
print("separated patterns within mixing bound:", s["condition_II"]["passed"],
      " worst deviation", s["condition_II"]["max_dev_separated"])
for row in s["condition_III"]["rare_sets"]:
    print(row)

# %%
# phi at increasing gaps, and its geometric decay ratio.
print(s["phi_profile"])
