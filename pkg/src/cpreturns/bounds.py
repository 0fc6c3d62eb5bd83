"""Right-hand sides of the compound Poisson approximation bounds.

The absolute constants in the bounds are not known explicitly; every
evaluator takes them as a user-supplied factor (default 1), so only the
shape and the rate in ``n`` are meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dist import DomainError


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the three-hypothesis bound; ``beta`` is the target measure ``mu(A_n)``."""

    r: int
    t: float
    p: float
    p_plus: float
    p_minus: float
    phi: float
    M: int
    m: int
    delta: float
    beta: float
    gamma_1: float
    gamma: float = 1.0
    gamma_2: float = 0.0
    C: float = 1.0
    n: int | None = None
    mu_Am: float | None = None
    q_n: float = 0.0

    def __post_init__(self):
        if not (0 <= self.p_minus <= self.p <= self.p_plus < 1):
            raise ValueError("need 0 <= p_minus <= p <= p_plus < 1")
        if self.r < 0 or self.t < 0 or self.m < 1 or self.M < 0:
            raise ValueError("need r >= 0, t >= 0, m >= 1, M >= 0")

    def in_small_gamma_regime(self) -> bool:
        return self.gamma * (self.gamma_1 + self.gamma_2) < 1 / 12


def regime_factor(t: float, r: int, p: float) -> float:
    """``t^r/r! e^(2r + 5t/2)`` if ``t > p r / 2``, else ``(2p)^r e^(t (1+2p)/(1-4p))``."""
    if t > 0.5 * p * r:
        return t ** r / math.factorial(r) * math.exp(2 * r + 2.5 * t)
    if p >= 0.25:
        raise DomainError(f"small-t branch needs p < 1/4, got p={p}")
    return (2 * p) ** r * math.exp(t * (1 + 2 * p) / (1 - 4 * p))


def _short_range_term(t: float, r: int) -> float:
    return t ** (r - 1) * math.exp(2 * r) / math.factorial(r)


def prop1_bound(x: BoundInputs) -> float:
    """Compound Poisson approximation error for one ``r`` under the three hypotheses."""
    mixing = x.p_plus ** (x.M / x.m) + (x.p_plus - x.p_minus) + x.phi
    return (x.C * (x.gamma_1 + x.delta * x.beta) * _short_range_term(x.t, x.r)
            + x.C * mixing * regime_factor(x.t, x.r, x.p))


def theorem7_bound(n: int, m: int, p: float, q_n: float, mu_An: float, delta: float,
                   phi_of_delta: float, t: float, r: int, C: float = 1.0) -> float:
    """Entry-count error at a periodic point of a phi-mixing measure."""
    return (C * delta * mu_An * _short_range_term(t, r)
            + C * (p ** (n / m) + q_n + phi_of_delta) * regime_factor(t, r, p))


def return_count_bound(n: int, m: int, p: float, q_n: float, mu_An: float, delta: float,
                       phi_of_delta: float, t: float, r: int, C: float = 1.0) -> float:
    """Return-count error; the entry bound with an extra factor ``n`` on both terms."""
    return n * theorem7_bound(n, m, p, q_n, mu_An, delta, phi_of_delta, t, r, C)


def first_return_bound(n: int, m: int, p: float, mu_An: float, C: float = 1.0) -> float:
    """Bound on ``|P(no return | A_n) - (1-p) e^-t|``: ``C (p^(n/m) + n mu(A_n))``."""
    return C * (p ** (n / m) + n * mu_An)


def axiom_a_delta(mu_An: float, rho: float) -> float:
    """Gap length ``log mu(A_n) / log rho`` that balances ``rho^delta`` against ``mu(A_n)``."""
    return math.log(mu_An) / math.log(rho)


def axiom_a_bound(n: int, m: int, p: float, mu_An: float, t: float, r: int, C: float = 1.0) -> float:
    """Error shape for equilibrium states with exponential phi-mixing."""
    return (C * mu_An * abs(math.log(mu_An)) * _short_range_term(t, r)
            + C * (p ** (n / m) + n * mu_An) * regime_factor(t, r, p))


def algebraic_delta(mu_Am: float, kappa: float) -> float:
    return mu_Am ** (-1 / kappa)


def algebraic_mixing_bound(n: int, mu_An: float, mu_Am: float, p: float, t: float, r: int,
                           C: float = 1.0) -> float:
    """Error shape when ``phi(k) ~ k^-kappa``."""
    return (C * mu_An * abs(math.log(mu_An)) * _short_range_term(t, r)
            + C * n * mu_Am * regime_factor(t, r, p))


def optimize_delta(bound: Callable[[float], float], grid: Sequence[float]) -> tuple[float, float]:
    """Grid value of ``delta`` minimising ``bound(delta)``; returns ``(delta, value)``."""
    values = [bound(d) for d in grid]
    i = int(np.argmin(values))
    return float(grid[i]), float(values[i])


def fit_convergence_rate(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope of ``log(error)`` against ``n`` and the coefficient of determination."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise ValueError("need at least 4 (n, error) points")
    if (pts[:, 1] <= 0).any():
        raise ValueError("errors must be positive")
    x, y = pts[:, 0], np.log(pts[:, 1])
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(((y - (slope * x + intercept)) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2
