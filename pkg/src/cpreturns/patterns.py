"""Hit-pattern combinatorics and numerical checks of the compound Poisson hypotheses.

A hit pattern ``v = (v_1 < ... < v_r)`` splits into blocks of immediate
returns: consecutive entries at distance at most ``M`` share a block, larger
gaps start a new block (a "head"). Within-block gaps measured in units of the
period ``m`` are the individual overlaps; their sum is the total overlap ``w``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .counting import BudgetError, joint_pattern_measure
from .dist import CountDistribution, DistParams, factorial_moment
from .symbolic import CylinderTarget, MeasureSpec, ShiftSystem, measured_phi


@dataclass(frozen=True)
class HitPattern:
    v: tuple[int, ...]
    heads: tuple[int, ...]         # indices (0-based) of block heads; heads[0] == 0
    overlaps: tuple[Fraction, ...]  # within-block gaps divided by m
    valid: bool                     # every within-block gap is a multiple of m
    delta: float                    # shortest gap into a head; inf for one block

    @property
    def r(self) -> int:
        return len(self.v)

    @property
    def j(self) -> int:
        return len(self.heads)

    @property
    def w(self) -> Fraction:
        return sum(self.overlaps, Fraction(0))

    @property
    def long_gaps(self) -> tuple[int, ...]:
        return tuple(self.v[i] - self.v[i - 1] for i in self.heads[1:])

    def blocks(self) -> list[tuple[int, ...]]:
        bounds = list(self.heads) + [self.r]
        return [self.v[a:b] for a, b in zip(bounds, bounds[1:])]

    def block_overlaps(self) -> list[Fraction]:
        out = []
        for b in self.blocks():
            out.append(sum((Fraction(y - x) for x, y in zip(b, b[1:])), Fraction(0)))
        return out


def classify(v: Sequence[int], M: int, m: int) -> HitPattern:
    v = tuple(int(x) for x in v)
    if not v or any(b <= a for a, b in zip(v, v[1:])):
        raise ValueError("v must be non-empty and strictly increasing")
    heads = [0]
    overlaps = []
    valid = True
    for i in range(1, len(v)):
        gap = v[i] - v[i - 1]
        if gap > M:
            heads.append(i)
        else:
            overlaps.append(Fraction(gap, m))
            valid &= gap % m == 0
    delta = min((v[i] - v[i - 1] for i in heads[1:]), default=math.inf)
    return HitPattern(v, tuple(heads), tuple(overlaps), valid, delta)


def enumerate_patterns(tau: int, r: int, M: int, m: int, budget: int = 10 ** 6) -> Iterator[HitPattern]:
    """All of ``G_r(tau)`` in lexicographic order, classified."""
    total = math.comb(tau, r)
    if total > budget:
        raise BudgetError(f"C({tau}, {r}) = {total} patterns exceed budget {budget}")
    for v in itertools.combinations(range(1, tau + 1), r):
        yield classify(v, M, m)


def sample_patterns(tau: int, r: int, M: int, m: int, size: int, seed: int = 0) -> list[HitPattern]:
    """Deterministic sample of distinct patterns from ``G_r(tau)``."""
    rng = np.random.default_rng(seed)
    seen: set[tuple[int, ...]] = set()
    limit = min(size, math.comb(tau, r))
    while len(seen) < limit:
        seen.add(tuple(int(x) for x in np.sort(rng.choice(np.arange(1, tau + 1), r, replace=False))))
    return [classify(v, M, m) for v in sorted(seen)]


def class_counts(tau: int, r: int, M: int, m: int) -> Counter:
    """``|G_{r,j,u}|`` keyed by ``(j, u)``; invalid-overlap patterns under key ``(j, None)``."""
    c: Counter = Counter()
    for hp in enumerate_patterns(tau, r, M, m):
        c[(hp.j, int(hp.w) if hp.valid else None)] += 1
    return c


def _overlap_compositions(u: int, parts: int) -> int:
    # compositions of u into `parts` positive integers
    if parts == 0:
        return int(u == 0)
    return math.comb(u - 1, parts - 1) if u >= 1 else 0


def cardinality_bound(tau: int, r: int, j: int, u: int) -> Fraction:
    """``tau^j / j! * C(u-1, r-j-1) * C(r-1, j-1)`` as an exact rational."""
    if not 1 <= j <= r:
        raise ValueError("need 1 <= j <= r")
    return (Fraction(tau ** j, math.factorial(j)) * _overlap_compositions(u, r - j)
            * math.comb(r - 1, j - 1))


def rare_index(hp: HitPattern, delta: int) -> int:
    """``s`` = 1 + number of long (inter-block) gaps that are at least ``delta``."""
    return 1 + sum(g >= delta for g in hp.long_gaps)


def is_rare(hp: HitPattern, delta: float) -> bool:
    return hp.delta < delta


def rare_class_counts(tau: int, r: int, M: int, m: int, delta: int) -> Counter:
    """``|R^s_{r,j,u}|`` keyed by ``(j, s, u)`` (valid patterns only)."""
    c: Counter = Counter()
    for hp in enumerate_patterns(tau, r, M, m):
        if hp.valid and is_rare(hp, delta):
            c[(hp.j, rare_index(hp, delta), int(hp.w))] += 1
    return c


def rare_set_bound(tau: int, r: int, j: int, s: int, u: int, delta: int) -> Fraction:
    """``C(j-1, s-1) delta^(j-s) / s! * tau^s * C(r-1, j-1) * C(u-1, r-j-1)``."""
    if not 1 <= s <= j - 1 <= r - 1:
        raise ValueError("need 1 <= s <= j - 1 <= r - 1")
    return (math.comb(j - 1, s - 1) * Fraction(delta ** (j - s) * tau ** s, math.factorial(s))
            * math.comb(r - 1, j - 1) * _overlap_compositions(u, r - j))


def rare_set_measure_bound(tau: int, r: int, delta: int, mu_n: float, mu_m: float,
                           alpha: float = 1.0, C: float = 1.0) -> float:
    """Aggregated bound on the total measure of the rare set:

    ``C alpha^(r-1) sum_j sum_s C(j-1,s-1) (delta mu_n)^(j-s) (tau mu_n)^s / s!
    C(r-1,j-1) (alpha mu_m)^(r-j)``.
    """
    total = 0.0
    for j in range(2, r + 1):
        for s in range(1, j):
            total += (math.comb(j - 1, s - 1) * (delta * mu_n) ** (j - s)
                      * (tau * mu_n) ** s / math.factorial(s)
                      * math.comb(r - 1, j - 1) * (alpha * mu_m) ** (r - j))
    return C * alpha ** (r - 1) * total


def rare_set_measure(system: ShiftSystem, measure: MeasureSpec, target: CylinderTarget,
                     tau: int, r: int, delta: int):
    """Exact total measure of the rare set ``R_r`` (``Delta(v) < delta``)."""
    total = 0.0
    for hp in enumerate_patterns(tau, r, target.M, target.m):
        if is_rare(hp, delta):
            total += joint_pattern_measure(system, measure, target.word, hp.v)
    return total


# -- condition (II) --------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, float) and math.isinf(x):
        return None
    return x


def verify_condition_II(system: ShiftSystem, measure: MeasureSpec, target: CylinderTarget,
                        tau: int, r_max: int, delta: int, sample_patterns_per_r: int | None = None,
                        exact: bool = False, C0: float = 1.0, enum_budget: int = 10 ** 6,
                        max_witnesses: int = 20) -> dict:
    """Compare ``E(eta_v)`` with ``p^w beta^j`` on every non-rare pattern.

    Patterns whose inter-block gaps are all at least ``n`` ("separated") are
    checked against ``C0 beta^j (p+^w - p-^w) + beta^j p^w ((1+phi)^j - 1)``
    with ``p+- = p +- q_n`` and ``phi`` measured at the shortest gap minus
    ``n``. Patterns with an inter-block gap in ``(M, n)`` place overlapping
    cylinders and are reported separately. Invalid-overlap patterns must have
    ``E(eta_v) = 0``. The returned report is JSON-serialisable.
    """
    n, m, M = target.n, target.m, target.M
    if exact:
        from .symbolic import cluster_parameter, cylinder_measure
        p, q = cluster_parameter(system, measure, target.word, n, exact=True)
        beta = cylinder_measure(system, measure, target.word, exact=True)
    else:
        p, q, beta = target.p, target.q_n, target.mu_n
    p_plus, p_minus = float(p) + float(q), max(float(p) - float(q), 0.0)
    phi_cache: dict[int, float] = {}

    def phi(gap: int) -> float:
        if gap not in phi_cache:
            phi_cache[gap] = measured_phi(system, measure, n, gap)
        return phi_cache[gap]

    report = {
        "target": "".join(map(str, target.word)), "n": n, "m": m, "M": M, "tau": tau,
        "delta": delta, "p": float(p), "q_n": float(q), "beta": float(beta), "exact": exact,
        "per_r": [], "violations": [], "invalid_nonzero": [],
        "max_dev_separated": 0.0, "max_dev_overlapping": 0.0, "coverage": 1.0,
    }
    checked = possible = 0
    for r in range(1, r_max + 1):
        total = math.comb(tau, r)
        if total <= enum_budget and sample_patterns_per_r is None:
            pats: Sequence[HitPattern] | Iterator[HitPattern] = enumerate_patterns(tau, r, M, m, enum_budget)
            covered = total
        else:
            size = sample_patterns_per_r or 10_000
            pats = sample_patterns(tau, r, M, m, size, seed=r)
            covered = len(pats)
        checked += covered
        possible += total
        classes: Counter = Counter()
        stats = {"r": r, "patterns": covered, "rare": 0, "separated": 0, "overlapping": 0, "invalid": 0}
        for hp in pats:
            if is_rare(hp, delta):
                stats["rare"] += 1
                continue
            E = joint_pattern_measure(system, measure, target.word, hp.v, exact=exact)
            if not hp.valid:
                stats["invalid"] += 1
                if E != 0 and len(report["invalid_nonzero"]) < max_witnesses:
                    report["invalid_nonzero"].append({"v": list(hp.v), "E": float(E)})
                continue
            w = int(hp.w)
            classes[(hp.j, w)] += 1
            model = p ** w * beta ** hp.j
            dev = abs(E - model)
            if all(g >= n for g in hp.long_gaps):
                stats["separated"] += 1
                ph = phi(int(hp.delta) - n) if hp.j > 1 else 0.0
                fb = float(beta) ** hp.j
                rhs = C0 * fb * (p_plus ** w - p_minus ** w) + fb * float(p) ** w * ((1 + ph) ** hp.j - 1)
                report["max_dev_separated"] = max(report["max_dev_separated"], float(dev))
                if float(dev) > rhs * (1 + 1e-9) + 1e-300 and len(report["violations"]) < max_witnesses:
                    report["violations"].append({"v": list(hp.v), "E": float(E), "model": float(model),
                                                 "rhs": rhs})
            else:
                stats["overlapping"] += 1
                report["max_dev_overlapping"] = max(report["max_dev_overlapping"], float(dev))
        stats["classes"] = {f"{j},{w}": c for (j, w), c in sorted(classes.items())}
        report["per_r"].append(stats)
    report["coverage"] = checked / possible if possible else 1.0
    report["passed"] = not report["violations"] and not report["invalid_nonzero"]
    return {k: _jsonable(v) for k, v in report.items()}


def compare_factorial_moments(distribution: CountDistribution, params: DistParams,
                              k_max: int) -> np.ndarray:
    """``|U_k - Q_k(t, p)|`` for ``k = 0..k_max``, with ``U_k = E[C(zeta, k)]``.

    Mass in ``tail_mass`` is ignored, so ``r_max`` should be large enough for
    it to be negligible.
    """
    r = np.arange(distribution.probs.size)
    out = np.empty(k_max + 1)
    for k in range(k_max + 1):
        U = float(np.dot([math.comb(int(x), k) for x in r], distribution.probs))
        out[k] = abs(U - factorial_moment(k, params, "entry"))
    return out


def empirical_factorial_moments(distribution: CountDistribution, k_max: int) -> np.ndarray:
    r = np.arange(distribution.probs.size)
    return np.array([float(np.dot([math.comb(int(x), k) for x in r], distribution.probs))
                     for k in range(k_max + 1)])


# -- identities used in the bound derivations ---------------------------------

def hockey_stick_residual(a: int, b: int) -> int:
    """``sum_{y=b}^{a} C(y-1, b-1) - C(a, b)`` (exactly 0)."""
    return sum(math.comb(y - 1, b - 1) for y in range(b, a + 1)) - math.comb(a, b)


def negative_binomial_series_residual(a: int, p: float, tol: float = 1e-15) -> float:
    """Relative error of ``sum_{u>=a} p^u C(u-1, a-1) = (p/(1-p))^a``.

    The series is summed until terms fall below ``tol`` times the closed form.
    """
    target = (p / (1 - p)) ** a
    terms = []
    u = a
    while True:
        term = p ** u * math.comb(u - 1, a - 1)
        terms.append(term)
        if u > a + 10 and term < tol * max(target, 1e-300):
            break
        u += 1
    return (math.fsum(terms) - target) / target


def triple_sum_residual(x: float, y: float, z: float, r_max: int = 80) -> float:
    """Truncated ``sum_{r>=2} sum_{j=2}^r sum_{s=1}^{j-1} C(j-1,s-1) x^s/s! C(r-1,j-1) y^(j-s) z^(r-j)``
    minus ``exp(x/(1-y-z)) - exp(x/(1-z))``."""
    terms = []
    for r in range(2, r_max + 1):
        for j in range(2, r + 1):
            cj = math.comb(r - 1, j - 1) * z ** (r - j)
            for s in range(1, j):
                terms.append(math.comb(j - 1, s - 1) * x ** s / math.factorial(s) * y ** (j - s) * cj)
    return math.fsum(terms) - (math.exp(x / (1 - y - z)) - math.exp(x / (1 - z)))
