"""Acceptance checks 1-9.

Each check records one PASS/FAIL line; the lines are printed in the pytest
terminal summary (see ``conftest.py``) and when this file is run directly::

    python tests/test_acceptance.py
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from cpreturns.bounds import fit_convergence_rate
from cpreturns.counting import brute_force_distribution, count_distribution, exact_entry_distribution, \
    exact_return_distribution, joint_pattern_measure
from cpreturns.dist import (DistParams, entry_return_integral_check, limit_distribution, moments,
                            pmf_array, sample, support_size, total_variation)
from cpreturns.experiments import OscillationSpec, run_oscillation
from cpreturns.patterns import (cardinality_bound, class_counts, classify, hockey_stick_residual,
                                negative_binomial_series_residual, rare_class_counts, rare_set_bound,
                                triple_sum_residual, verify_condition_II)
from cpreturns.symbolic import MeasureSpec, ShiftSystem, make_target

RESULTS: dict[int, str] = {}

FULL2 = ShiftSystem.full(2)
BERN3 = MeasureSpec.bernoulli([0.3, 0.7])
MEASURES = {"bernoulli(0.5)": MeasureSpec.bernoulli([0.5, 0.5]), "bernoulli(0.3)": BERN3,
            "markov": MeasureSpec.markov([[0.9, 0.1], [0.2, 0.8]])}

# regression value from the first validated run (total variation at n = 12, t = 1, r <= 10).
# The DP over tau = 2.7e6 steps conserves mass only to ~1.5e-10, so the pin is absolute.
TV_N12_FROZEN = 2.300779733e-06
TV_N12_ATOL = 1e-10


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"


def test_1_closed_forms():
    t0 = time.perf_counter()
    worst_norm = worst_poisson = worst_moment = 0.0
    for t in (0.0, 0.1, 1.0, 5.0, 12.0, 20.0):
        for p in (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95):
            prm = DistParams(t, p)
            for kind in ("entry", "return"):
                R = support_size(prm, 1e-16, kind) + 20
                probs = pmf_array(R, prm, kind)
                worst_norm = max(worst_norm, abs(math.fsum(probs) - 1))
                r = np.arange(R + 1)
                m1 = math.fsum(r * probs)
                var = math.fsum((r - m1) ** 2 * probs)
                mean_cf, var_cf = moments(prm, kind)
                worst_moment = max(worst_moment, abs(m1 - mean_cf), abs(var - var_cf))
                if p == 0.0:
                    ref = stats.poisson.pmf(r, t) if t > 0 else (r == 0).astype(float)
                    worst_poisson = max(worst_poisson, float(np.max(np.abs(probs - ref))))
    elapsed = time.perf_counter() - t0
    ok = worst_norm <= 1e-10 and worst_poisson <= 1e-15 and worst_moment <= 1e-8 and elapsed < 5
    record(1, ok, f"norm err {worst_norm:.2e}, Poisson err {worst_poisson:.2e}, "
                  f"moment err {worst_moment:.2e}, {elapsed:.2f}s")
    assert worst_norm <= 1e-10
    assert worst_poisson <= 1e-15
    assert worst_moment <= 1e-8
    assert elapsed < 5


def test_2_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for name, mu in MEASURES.items():
        for pattern in ("0", "00", "01", "010"):
            for tau in range(1, 13):
                d = count_distribution(FULL2, mu, pattern, tau, 8)
                b = brute_force_distribution(FULL2, mu, pattern, tau, 8)
                worst = max(worst, float(np.max(np.abs(d.probs - b.probs))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 60
    record(2, ok, f"max |DP - enumeration| = {worst:.2e} over 144 cases, {elapsed:.2f}s")
    assert worst <= 1e-12
    assert elapsed < 60


def test_3_convergence():
    t0 = time.perf_counter()
    lim = limit_distribution(DistParams(1.0, 0.3), 10)
    tv = {}
    for n in range(4, 13):
        tg = make_target(FULL2, BERN3, "0", n=n)
        tv[n] = total_variation(exact_entry_distribution(FULL2, BERN3, tg, 1.0, 10), lim, 10)
    rate, r2 = fit_convergence_rate(sorted(tv.items()))
    elapsed = time.perf_counter() - t0
    ok = tv[12] < tv[4] and rate < 0 and tv[12] < 0.05 and elapsed < 600
    record(3, ok, f"TV(4)={tv[4]:.3e}, TV(12)={tv[12]:.3e}, log-TV slope {rate:.3f} (r2={r2:.4f}), "
                  f"{elapsed:.2f}s")
    assert tv[12] < tv[4]
    assert rate < 0
    assert tv[12] < 0.05
    assert tv[12] == pytest.approx(TV_N12_FROZEN, rel=0, abs=TV_N12_ATOL)
    assert elapsed < 600


def test_4_return_law():
    t0 = time.perf_counter()
    tg = make_target(FULL2, BERN3, "0", n=12)
    d1 = exact_return_distribution(FULL2, BERN3, tg, 1.0, 10)
    err0 = abs(d1.probs[0] - 0.7 * math.exp(-1.0))
    d_small = exact_return_distribution(FULL2, BERN3, tg, 0.01, 10)
    geo = max(abs(d_small.probs[r] - 0.3 ** r * 0.7) for r in range(4))
    elapsed = time.perf_counter() - t0
    ok = err0 < 0.02 and geo < 0.02 and elapsed < 600
    record(4, ok, f"|P(no return) - (1-p)e^-t| = {err0:.2e}, geometric err at t=0.01 {geo:.2e}, "
                  f"{elapsed:.2f}s")
    assert err0 < 0.02
    assert geo < 0.02
    assert elapsed < 600


def test_5_integral_relation():
    t0 = time.perf_counter()
    grid = np.linspace(0.0, 5.0, 21)
    worst = max(entry_return_integral_check(p, k, grid) for p in (0.0, 0.3, 0.7) for k in range(1, 6))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 5
    record(5, ok, f"max quadrature residual {worst:.2e}, {elapsed:.2f}s")
    assert worst < 1e-6
    assert elapsed < 5


def test_6_combinatorics():
    t0 = time.perf_counter()
    violations = checked = 0
    for m in (1, 2):
        for r in range(1, 5):
            for (j, u), count in class_counts(30, r, 6, m).items():
                if u is not None:
                    checked += 1
                    violations += count > cardinality_bound(30, r, j, u)
            for (j, s, u), count in rare_class_counts(30, r, 6, m, 8).items():
                checked += 1
                violations += count > rare_set_bound(30, r, j, s, u, 8)
    hockey = max(abs(hockey_stick_residual(a, b)) for a in range(1, 13) for b in range(1, a + 1))
    negbin = max(abs(negative_binomial_series_residual(a, p)) for a in range(1, 13)
                 for p in (0.1, 0.3, 0.5, 0.7, 0.9))
    triple = max(abs(triple_sum_residual(x, y, z)) for x in (0.5, 1.0, 2.0)
                 for y, z in ((0.1, 0.2), (0.25, 0.25), (0.0, 0.5), (0.5, 0.0)))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and hockey == 0 and negbin < 1e-9 and triple < 1e-9 and elapsed < 120
    record(6, ok, f"{violations} bound violations in {checked} classes, identity residuals "
                  f"{hockey}, {negbin:.1e}, {triple:.1e}, {elapsed:.2f}s")
    assert violations == 0
    assert hockey == 0
    assert negbin < 1e-9
    assert triple < 1e-9
    assert elapsed < 120


def test_7_condition_II_exact_on_products():
    t0 = time.perf_counter()
    worst = Fraction(0)
    invalid_nonzero = 0
    separated = 0
    for word, n, tau in (("0", 3, 16), ("0", 5, 20), ("01", 4, 18), ("011", 6, 18), ("0101", 4, 16)):
        tg = make_target(FULL2, BERN3, word, n=n)
        rep = verify_condition_II(FULL2, BERN3, tg, tau, 3, delta=n, exact=True)
        worst = max(worst, Fraction(rep["max_dev_separated"]))
        invalid_nonzero += len(rep["invalid_nonzero"])
        separated += sum(s["separated"] for s in rep["per_r"])
    # invalid overlaps directly, in rational arithmetic
    tg = make_target(FULL2, BERN3, "01", n=6)
    direct = [joint_pattern_measure(FULL2, BERN3, tg.word, v, exact=True)
              for v in ((1, 2), (1, 4, 5), (3, 6, 9, 10))
              if not classify(v, tg.M, tg.m).valid]
    invalid_nonzero += sum(x != 0 for x in direct)
    elapsed = time.perf_counter() - t0
    ok = worst == 0 and invalid_nonzero == 0 and elapsed < 120
    record(7, ok, f"max deviation {float(worst)} over {separated} non-rare patterns, "
                  f"{invalid_nonzero} nonzero invalid-overlap patterns, {elapsed:.2f}s")
    assert worst == 0
    assert invalid_nonzero == 0
    assert len(direct) == 3
    assert elapsed < 120


def test_8_oscillation():
    t0 = time.perf_counter()
    spec = OscillationSpec(w=0.3, t0=1.0, r0=2, n_max=40, blocks=4)
    res = run_oscillation(spec)
    s = res.summary
    eps = s["epsilon"]
    blocks = s["blocks"]
    alternating = [b for b in blocks if b["law"] is not None]
    labels = [b["law"] for b in alternating]
    alternates = all(a != b for a, b in zip(labels, labels[1:]))
    elapsed = time.perf_counter() - t0
    ok = len(alternating) >= 4 and alternates and elapsed < 1200
    record(8, ok, f"{len(blocks)} block(s) found (n = {[b['n'] for b in blocks]}), eps = {eps:.4f}, "
                  f"stopped: {s['stopped']}, {elapsed:.2f}s")
    assert len(alternating) >= 4
    assert alternates
    assert elapsed < 1200


def test_9_sampler():
    t0 = time.perf_counter()
    pvals = {}
    for (t, p), method in itertools.product(((1.0, 0.3), (2.0, 0.5), (0.5, 0.7)), ("compound", "inverse_cdf")):
        prm = DistParams(t, p)
        x = sample(prm, np.random.default_rng(12345), "entry", size=10 ** 6, method=method)
        probs = pmf_array(30, prm)
        counts = np.bincount(np.minimum(x, 31), minlength=32)
        expected = np.append(probs, max(1 - probs.sum(), 0.0)) * x.size
        # pool every bin from the first sparse one onwards into a single bin
        cut = int(np.argmax(expected < 5)) if (expected < 5).any() else expected.size
        obs = np.append(counts[:cut - 1], counts[cut - 1:].sum())
        exp = np.append(expected[:cut - 1], expected[cut - 1:].sum())
        pvals[(t, p, method)] = stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue
    elapsed = time.perf_counter() - t0
    ok = min(pvals.values()) > 1e-3 and elapsed < 60
    record(9, ok, "chi-square p-values " + ", ".join(f"{k}: {v:.3f}" for k, v in pvals.items())
           + f", {elapsed:.2f}s")
    assert min(pvals.values()) > 1e-3
    assert elapsed < 60


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
