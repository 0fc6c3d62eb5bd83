"""Polya-Aeppli entry and return laws.

The entry law has probabilities ``exp(-t) * P_r(t, p)`` and generating
function ``exp(t (z - 1) / (1 - p z))``; the return law multiplies that
generating function by the geometric factor ``(1 - p) / (1 - p z)``.
For ``p = 0`` both reduce to Poisson(t).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate

Kind = Literal["entry", "return"]

_EXACT_BINOM_MAX = 64
_DIRECT_T_MAX = 30.0


class DomainError(ValueError):
    """Argument outside the domain of a closed-form expression."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""


@dataclass(frozen=True)
class DistParams:
    """Rescaled time ``t >= 0`` and cluster parameter ``0 <= p < 1``."""

    t: float
    p: float

    def __post_init__(self):
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise ValueError(f"t must be finite and >= 0, got {self.t}")
        if not (0 <= self.p < 1):
            raise ValueError(f"p must lie in [0, 1), got {self.p}")

    @property
    def mean(self) -> float:
        return self.t / (1 - self.p)

    @property
    def variance(self) -> float:
        return self.t * (1 + self.p) / (1 - self.p) ** 2


PROVENANCES = ("exact", "monte_carlo", "limit_law")


@dataclass
class CountDistribution:
    """Probabilities of ``r = 0..r_max`` hits plus the mass of ``r > r_max``."""

    probs: np.ndarray
    tail_mass: float
    provenance: str
    sample_count: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.probs.ndim != 1 or self.probs.size == 0:
            raise ValueError("probs must be a non-empty 1-d vector")
        if not self.tail_mass >= 0:
            raise ValueError("tail_mass must be non-negative")

    @property
    def r_max(self) -> int:
        return self.probs.size - 1

    def total_mass(self) -> float:
        return math.fsum(self.probs) + self.tail_mass

    def validate(self, tol: float = 1e-9) -> None:
        if np.any(self.probs < 0) or np.any(self.probs > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.tail_mass < 0:
            raise ValueError("tail_mass must be non-negative")
        if self.provenance != "monte_carlo" and abs(self.total_mass() - 1) > tol:
            raise ValueError(f"mass {self.total_mass()!r} is not 1 within {tol}")

    def folded(self, r_max: int) -> np.ndarray:
        """Probabilities for ``0..r_max`` followed by one bucket for ``r > r_max``."""
        out = np.zeros(r_max + 2)
        k = min(r_max + 1, self.probs.size)
        out[:k] = self.probs[:k]
        out[r_max + 1] = math.fsum(self.probs[k:]) + self.tail_mass
        return out

    def to_dict(self) -> dict:
        return {
            "r_max": self.r_max,
            "probs": [float(x) for x in self.probs],
            "tail_mass": float(self.tail_mass),
            "provenance": self.provenance,
            "sample_count": int(self.sample_count),
            "params": dict(self.params),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CountDistribution":
        probs = d["probs"]
        if len(probs) != d["r_max"] + 1:
            raise ValueError("r_max disagrees with the length of probs")
        return cls(probs, d["tail_mass"], d["provenance"],
                   d.get("sample_count", 0), d.get("params", {}))

    @classmethod
    def from_json(cls, text: str) -> "CountDistribution":
        return cls.from_dict(json.loads(text))


def total_variation(a: CountDistribution, b: CountDistribution, r_max: int | None = None) -> float:
    """Half the l1 distance, with counts above ``r_max`` folded into one bucket."""
    if r_max is None:
        r_max = min(a.r_max, b.r_max)
    return 0.5 * float(np.abs(a.folded(r_max) - b.folded(r_max)).sum())


# -- closed forms -----------------------------------------------------------

def _log_binom(n: int, k: int) -> float:
    if n <= _EXACT_BINOM_MAX:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _logsumexp(logs: list[float]) -> float:
    if not logs:
        return -math.inf
    top = max(logs)
    if top == -math.inf:
        return top
    return top + math.log(math.fsum(math.exp(x - top) for x in logs))


def _entry_terms_log(r: int, t: float, p: float) -> list[float]:
    lt, lq = math.log(t), math.log1p(-p)
    lp = math.log(p) if p > 0 else -math.inf
    logs = []
    for j in range(1, r + 1):
        if r - j and p == 0:
            continue
        logs.append((r - j) * (lp if r - j else 0.0) + j * (lq + lt)
                    - math.lgamma(j + 1) + _log_binom(r - 1, j - 1))
    return logs


def _return_terms_log(r: int, t: float, p: float) -> list[float]:
    lq = math.log1p(-p)
    lp = math.log(p) if p > 0 else -math.inf
    lt = math.log(t) if t > 0 else -math.inf
    logs = []
    for j in range(0, r + 1):
        if (r - j and p == 0) or (j and t == 0):
            continue
        logs.append((r - j) * (lp if r - j else 0.0) + (j + 1) * lq
                    + (j * lt if j else 0.0) - math.lgamma(j + 1) + _log_binom(r, j))
    return logs


def entry_P(r: int, params: DistParams) -> float:
    """The polynomial ``P_r(t, p)``; ``P_0 = 1``."""
    t, p = params.t, params.p
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        return 1.0
    if t == 0:
        return 0.0
    if r <= _EXACT_BINOM_MAX and t <= _DIRECT_T_MAX:
        return math.fsum(p ** (r - j) * (1 - p) ** j * t ** j / math.factorial(j)
                         * math.comb(r - 1, j - 1) for j in range(1, r + 1))
    return math.exp(_logsumexp(_entry_terms_log(r, t, p)))


def return_P_hat(r: int, params: DistParams) -> float:
    """The polynomial ``P^_r(t, p)``; at ``t = 0`` it equals ``p^r (1 - p)``."""
    t, p = params.t, params.p
    if r < 0:
        raise ValueError("r must be >= 0")
    if r <= _EXACT_BINOM_MAX and t <= _DIRECT_T_MAX:
        return math.fsum(p ** (r - j) * (1 - p) ** (j + 1) * t ** j / math.factorial(j)
                         * math.comb(r, j) for j in range(0, r + 1))
    return math.exp(_logsumexp(_return_terms_log(r, t, p)))


def entry_pmf(r: int, params: DistParams) -> float:
    t, p = params.t, params.p
    if r == 0:
        return math.exp(-t)
    if t == 0:
        return 0.0
    if t <= _DIRECT_T_MAX and r <= _EXACT_BINOM_MAX:
        return math.exp(-t) * entry_P(r, params)
    return math.exp(-t + _logsumexp(_entry_terms_log(r, t, p)))


def return_pmf(r: int, params: DistParams) -> float:
    t, p = params.t, params.p
    if t <= _DIRECT_T_MAX and r <= _EXACT_BINOM_MAX:
        return math.exp(-t) * return_P_hat(r, params)
    return math.exp(-t + _logsumexp(_return_terms_log(r, t, p)))


def pmf(r: int, params: DistParams, kind: Kind = "entry") -> float:
    return entry_pmf(r, params) if kind == "entry" else return_pmf(r, params)


def pmf_array(r_max: int, params: DistParams, kind: Kind = "entry") -> np.ndarray:
    """Vector of probabilities for ``r = 0..r_max``.

    Uses the compound-Poisson (Panjer) recursion, whose terms are all
    non-negative, so long vectors are computed without cancellation. The
    return law is the entry law convolved with a geometric law on
    ``{0, 1, ...}``.
    """
    t, p = params.t, params.p
    if t > 500.0:
        return np.array([pmf(r, params, kind) for r in range(r_max + 1)])
    out = np.zeros(r_max + 1)
    out[0] = math.exp(-t)
    if r_max > 0 and t > 0:
        # k f_k for cluster sizes f_k = (1 - p) p^(k-1)
        k = np.arange(1, r_max + 1)
        kf = k * (1 - p) * p ** (k - 1.0)
        for r in range(1, r_max + 1):
            out[r] = t / r * float(np.dot(kf[:r], out[r - 1::-1]))
    if kind == "return":
        ret = np.empty_like(out)
        acc = 0.0
        for r in range(r_max + 1):
            acc = p * acc + (1 - p) * out[r]
            ret[r] = acc
        return ret
    return out


def limit_distribution(params: DistParams, r_max: int, kind: Kind = "entry") -> CountDistribution:
    probs = pmf_array(r_max, params, kind)
    tail = max(0.0, 1.0 - math.fsum(probs))
    return CountDistribution(probs, tail, "limit_law",
                             params={"t": params.t, "p": params.p, "kind": kind})


def entry_pgf(z: complex, params: DistParams) -> complex:
    t, p = params.t, params.p
    if p > 0 and abs(z) >= 1 / p:
        raise DomainError(f"|z| = {abs(z)} is outside the disk of radius 1/p = {1 / p}")
    return np.exp(t * (z - 1) / (1 - p * z))


def return_pgf(z: complex, params: DistParams) -> complex:
    p = params.p
    return (1 - p) / (1 - z * p) * entry_pgf(z, params)


def factorial_moment(k: int, params: DistParams, kind: Kind = "entry") -> float:
    """``Q_k`` (entry) or ``Q^_k`` (return): the k-th Taylor coefficient at z = 1."""
    t, p = params.t, params.p
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 1.0
    if kind == "entry":
        s = math.fsum(p ** (k - j) * t ** j / math.factorial(j) * math.comb(k - 1, j - 1)
                      for j in range(1, k + 1))
    else:
        s = math.fsum(p ** (k - j) * t ** j / math.factorial(j) * math.comb(k, j)
                      for j in range(0, k + 1))
    return s / (1 - p) ** k


def moments(params: DistParams, kind: Kind = "entry") -> tuple[float, float]:
    """Mean and variance."""
    t, p = params.t, params.p
    if kind == "entry":
        return t / (1 - p), t * (1 + p) / (1 - p) ** 2
    return (t + p) / (1 - p), (t + t * p + p) / (1 - p) ** 2


def tail_bound(r_max: int, params: DistParams, kind: Kind = "entry") -> float:
    """Chernoff bound on ``P(X > r_max)``: ``min_z g(z) / z^(r_max + 1)`` over ``1 < z < 1/p``."""
    t, p = params.t, params.p
    z_hi = max(4.0, 4.0 * (r_max + 1) / max(t, 1e-12))
    if p > 0:
        z_hi = min(z_hi, 1 / p)
    zs = 1 + (z_hi - 1) * np.linspace(1e-4, 0.999, 2000)
    # log of the generating function, kept in log space to avoid overflow
    logb = t * (zs - 1) / (1 - p * zs) - (r_max + 1) * np.log(zs)
    if kind == "return":
        logb += np.log1p(-p) - np.log1p(-p * zs)
    return float(min(1.0, np.exp(logb.min())))


def support_size(params: DistParams, tol: float = 1e-10, kind: Kind = "entry") -> int:
    """Smallest ``R`` whose Chernoff tail bound ``P(X > R)`` is below ``tol``."""
    mean, var = moments(params, kind)
    r = int(mean + 5 * math.sqrt(var)) + 1
    while tail_bound(r, params, kind) >= tol:
        r = int(r * 1.25) + 1
    lo, hi = int(mean), r
    while lo < hi:
        mid = (lo + hi) // 2
        if tail_bound(mid, params, kind) < tol:
            hi = mid
        else:
            lo = mid + 1
    return hi


def sample(params: DistParams, rng: np.random.Generator, kind: Kind = "entry",
           size: int | None = None, method: str = "compound"):
    """Draw counts from the entry or return law.

    ``method="compound"`` sums a Poisson(t) number of geometric cluster sizes
    on ``{1, 2, ...}``; for the return law an independent geometric count on
    ``{0, 1, ...}`` with ratio ``p`` is added, which multiplies the generating
    function by ``(1 - p) / (1 - p z)``. ``method="inverse_cdf"`` inverts the
    cumulative distribution of the closed-form probabilities.
    """
    n = 1 if size is None else int(size)
    t, p = params.t, params.p
    if method == "inverse_cdf":
        r_max = support_size(params, 1e-15, kind)
        cdf = np.cumsum(pmf_array(r_max, params, kind))
        out = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right")
    elif method == "compound":
        clusters = rng.poisson(t, n)
        out = clusters.copy()
        pos = clusters > 0
        if p > 0 and pos.any():
            out[pos] += rng.negative_binomial(clusters[pos], 1 - p)
        if kind == "return":
            out += rng.geometric(1 - p, n) - 1
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    out = out.astype(np.int64)
    return int(out[0]) if size is None else out


# -- entry/return relation ----------------------------------------------------

def _entry_density(k: int, s: float, p: float) -> float:
    # Kac-normalised time: u = (1 - p) s
    return entry_pmf(k, DistParams((1 - p) * s, p))


def _return_density(k: int, s: float, p: float) -> float:
    return return_pmf(k, DistParams((1 - p) * s, p))


def entry_return_integral_check(p: float, k: int, t_grid, epsabs: float = 1e-13) -> float:
    """Largest residual of ``D_k(t) = int_0^t (D^_{k-1}(s) - D^_k(s)) ds`` over ``t_grid``.

    ``D_k(s) = exp(-u) P_k(u, p)`` and ``D^_k(s) = exp(-u) P^_k(u, p)`` with
    ``u = (1 - p) s``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    worst = 0.0
    for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
        if t == 0:
            lhs, rhs = _entry_density(k, 0.0, p), 0.0
        else:
            rhs, err, info = integrate.quad(
                lambda s: _return_density(k - 1, s, p) - _return_density(k, s, p),
                0.0, float(t), epsabs=epsabs, epsrel=1e-12, limit=200, full_output=True)[:3]
            if err > 1e-9:
                raise QuadratureError(f"quad error estimate {err:.3g} at t={t}, k={k}, p={p}")
            lhs = _entry_density(k, float(t), p)
        worst = max(worst, abs(lhs - rhs))
    return worst
