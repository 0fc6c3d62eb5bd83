"""Exact and simulated distributions of the number of visits to a cylinder.

The entry count is ``#{1 <= j <= tau : T^j z in A_n}`` for ``z`` drawn from
the invariant measure, i.e. the pattern occupies coordinates ``j..j+n-1``.
The return count is the same quantity conditioned on ``z in A_n``.

The exact engine runs a pattern-matching automaton jointly with the symbol
chain. Its transfer operator is a matrix polynomial ``B0 + z B1`` in the hit
marker ``z``; powers are taken by repeated squaring with the polynomial
degree truncated at ``r_max + 1``, where the top coefficient collects every
count above ``r_max``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dist import CountDistribution
from .symbolic import (CylinderTarget, MeasureSpec, ShiftSystem, Word, as_word,
                       cylinder_measure, observation_time, pinned_measure)


class BudgetError(RuntimeError):
    """Requested computation exceeds its configured resource budget."""


@dataclass(frozen=True, eq=False)
class HitCounterAutomaton:
    """KMP automaton: state ``s`` is the length of the longest pattern prefix
    that is a suffix of the symbols read so far; ``s == n`` marks a hit."""

    pattern: Word
    alphabet_size: int
    step: np.ndarray  # (n + 1, alphabet_size) -> next state

    @classmethod
    def build(cls, pattern: str | Sequence[int], alphabet_size: int) -> "HitCounterAutomaton":
        w = as_word(pattern)
        n = len(w)
        if n == 0:
            raise ValueError("pattern must be non-empty")
        fail = [0] * (n + 1)
        k = 0
        for i in range(1, n):
            while k and w[i] != w[k]:
                k = fail[k]
            if w[i] == w[k]:
                k += 1
            fail[i + 1] = k
        step = np.zeros((n + 1, alphabet_size), dtype=np.int64)
        for s in range(n + 1):
            for a in range(alphabet_size):
                if s < n and w[s] == a:
                    step[s, a] = s + 1
                elif s == 0:
                    step[s, a] = 0
                else:
                    step[s, a] = step[fail[s], a]
        return cls(w, alphabet_size, step)

    @property
    def n(self) -> int:
        return len(self.pattern)

    def run(self, symbols: Sequence[int], state: int = 0) -> list[int]:
        out = []
        for a in symbols:
            state = int(self.step[state, a])
            out.append(state)
        return out


def _transfer(aut: HitCounterAutomaton, measure: MeasureSpec):
    """Sparse transfer data on states ``(automaton state, last symbol)``."""
    k, n = aut.alphabet_size, aut.n
    src, dst, wts, hit = [], [], [], []
    for s in range(n + 1):
        for c in range(k):
            for a in range(k):
                w = measure.matrix[c, a]
                if w == 0:
                    continue
                s2 = int(aut.step[s, a])
                src.append(s * k + c)
                dst.append(s2 * k + a)
                wts.append(w)
                hit.append(s2 == n)
    return (np.array(src), np.array(dst), np.array(wts), np.array(hit, dtype=bool))


def _dense_poly_matrix(aut, measure, K):
    S = (aut.n + 1) * aut.alphabet_size
    src, dst, wts, hit = _transfer(aut, measure)
    M = np.zeros((K + 1, S, S))
    np.add.at(M[0], (src[~hit], dst[~hit]), wts[~hit])
    np.add.at(M[1 if K >= 1 else 0], (src[hit], dst[hit]), wts[hit])
    return M


def _poly_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Product of truncated matrix (or row-vector) polynomials; the top degree ``K`` means ``>= K``."""
    K = A.shape[0] - 1
    C = np.zeros(A.shape[:-1] + B.shape[-1:])
    for a in range(K + 1):
        if not A[a].any():
            continue
        for b in range(K + 1):
            C[min(a + b, K)] += A[a] @ B[b]
    return C


def _apply_power(v: np.ndarray, M: np.ndarray, L: int) -> np.ndarray:
    while L:
        if L & 1:
            v = _poly_matmul(v, M)
        L >>= 1
        if L:
            M = _poly_matmul(M, M)
            # rows are stochastic; strip the rounding drift squaring accumulates
            rows = M.sum(axis=(0, 2))
            M /= np.where(rows > 0, rows, 1.0)[None, :, None]
    return v


def _apply_scan(v: np.ndarray, aut, measure, K: int, L: int) -> np.ndarray:
    src, dst, wts, hit = _transfer(aut, measure)
    S = v.shape[1]
    for _ in range(L):
        new = np.zeros_like(v)
        for c in range(K + 1):
            flow = v[c, src] * wts
            if not flow.any():
                continue
            new[c] += np.bincount(dst[~hit], flow[~hit], minlength=S)
            new[min(c + 1, K)] += np.bincount(dst[hit], flow[hit], minlength=S)
        v = new
    return v


def _work_estimate(S: int, K: int, L: int, method: str) -> float:
    if method == "scan":
        return float(S) * (K + 1) * max(L, 1)
    return float(S) ** 3 * (K + 1) ** 2 * max(1, L.bit_length())


def _finish(v: np.ndarray, K: int, params: dict) -> CountDistribution:
    totals = v.sum(axis=1)
    probs = np.clip(totals[:K], 0.0, 1.0)
    tail = max(0.0, float(totals[K]))
    return CountDistribution(probs, tail, "exact", 0, params)


def count_distribution(system: ShiftSystem, measure: MeasureSpec, pattern: str | Sequence[int],
                       tau: int, r_max: int, kind: str = "entry", method: str = "doubling",
                       budget: float = 5e10) -> CountDistribution:
    """Exact law of the number of hits of ``pattern`` at offsets ``1..tau``.

    ``kind="entry"`` starts from the invariant measure; ``kind="return"``
    conditions on the pattern occupying coordinates ``0..n-1``.
    """
    w = as_word(pattern)
    measure.check_support(system)
    if r_max < 0 or tau < 0:
        raise ValueError("tau and r_max must be non-negative")
    n, k = len(w), system.alphabet_size
    K = r_max + 1
    S = (n + 1) * k
    params = {"n": n, "tau": int(tau), "kind": kind}
    if tau == 0:
        return CountDistribution(np.eye(1, K, 0).ravel(), 0.0, "exact", 0, params)
    if kind == "return" and cylinder_measure(system, measure, w) == 0:
        raise ValueError("cannot condition on a null cylinder")
    aut = HitCounterAutomaton.build(w, k)
    v = np.zeros((K + 1, S))
    if kind == "entry":
        # coordinate 1 drawn from the invariant marginal
        for a in range(k):
            s = int(aut.step[0, a])
            v[min(int(s == n), K), s * k + a] += measure.stationary[a]
        L = tau + n - 2
    elif kind == "return":
        v[0, n * k + w[-1]] = 1.0
        L = tau
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if _work_estimate(S, K, L, method) > budget:
        raise BudgetError(f"{method} DP for n={n}, tau={tau}, r_max={r_max} exceeds budget {budget:g}; "
                          "use monte_carlo_distribution instead")
    if method == "doubling":
        v = _apply_power(v, _dense_poly_matrix(aut, measure, K), L)
    elif method == "scan":
        v = _apply_scan(v, aut, measure, K, L)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish(v, K, params)


def exact_entry_distribution(system: ShiftSystem, measure: MeasureSpec, target: CylinderTarget,
                             t: float, r_max: int, **kw) -> CountDistribution:
    tau = observation_time(target, t)
    d = count_distribution(system, measure, target.word, tau, r_max, "entry", **kw)
    d.params.update(t=float(t), p=target.p)
    return d


def exact_return_distribution(system: ShiftSystem, measure: MeasureSpec, target: CylinderTarget,
                              t: float, r_max: int, **kw) -> CountDistribution:
    tau = observation_time(target, t)
    d = count_distribution(system, measure, target.word, tau, r_max, "return", **kw)
    d.params.update(t=float(t), p=target.p)
    return d


def brute_force_distribution(system: ShiftSystem, measure: MeasureSpec, pattern: str | Sequence[int],
                             tau: int, r_max: int, budget: int = 2 ** 24,
                             chunk: int = 2 ** 16) -> CountDistribution:
    """Enumerate every string on coordinates ``0..tau+n-1`` and weight it by its measure."""
    w = np.array(as_word(pattern))
    n, k = w.size, system.alphabet_size
    L = tau + n
    total = k ** L
    if total > budget:
        raise BudgetError(f"{k}^{L} strings exceed enumeration budget {budget}")
    K = r_max + 1
    acc = np.zeros(K + 1)
    pi, P = measure.stationary, measure.matrix
    A = system.transitions.astype(bool)
    powers = k ** np.arange(L - 1, -1, -1)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        s = (idx[:, None] // powers) % k
        weight = pi[s[:, 0]] * np.prod(P[s[:, :-1], s[:, 1:]], axis=1)
        weight *= np.all(A[s[:, :-1], s[:, 1:]], axis=1)
        hits = np.zeros(idx.size, dtype=np.int64)
        for j in range(1, tau + 1):
            hits += np.all(s[:, j:j + n] == w, axis=1)
        acc += np.bincount(np.minimum(hits, K), weights=weight, minlength=K + 1)
    return CountDistribution(acc[:K], acc[K], "exact", 0, {"n": int(n), "tau": int(tau), "kind": "entry"})


def joint_pattern_measure(system: ShiftSystem, measure: MeasureSpec, pattern: str | Sequence[int],
                          positions: Sequence[int], exact: bool = False):
    """``mu`` of the intersection of ``T^-v A_n`` over ``v`` in ``positions``."""
    w = as_word(pattern)
    pos = [int(v) for v in positions]
    if not pos or any(b <= a for a, b in zip(pos, pos[1:])):
        raise ValueError("positions must be a non-empty strictly increasing vector")
    pins: dict[int, int] = {}
    for v in pos:
        for i, a in enumerate(w):
            c = v - pos[0] + i
            if pins.setdefault(c, a) != a:
                return Fraction(0) if exact else 0.0
    return pinned_measure(system, measure, pins, exact)


# -- Monte Carlo --------------------------------------------------------------

def _first_passage(aut, measure, start: np.ndarray, steps: int) -> np.ndarray:
    """Probability that the first hit happens at step ``1..steps`` from ``start``."""
    src, dst, wts, hit = _transfer(aut, measure)
    S = start.size
    out = np.zeros(steps)
    q = start.copy()
    for i in range(steps):
        flow = q[src] * wts
        out[i] = flow[hit].sum()
        q = np.bincount(dst[~hit], flow[~hit], minlength=S)
        if not q.any():
            break
    return out


def _draw(pmf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw from a defective pmf on ``1..len(pmf)``; ``len + 1`` means none."""
    cdf = np.cumsum(pmf)
    return np.searchsorted(cdf, u, side="right") + 1


def _mc_renewal(aut, measure, tau, K, n_samples, rng, first, gaps):
    pos = _draw(first, rng.random(n_samples))
    counts = (pos <= tau).astype(np.int64)
    for _ in range(K):
        live = pos <= tau
        if not live.any():
            break
        pos[live] += _draw(gaps, rng.random(int(live.sum())))
        counts += pos <= tau
    return np.bincount(np.minimum(counts, K), minlength=K + 1)


def _mc_orbit(aut, measure, tau, K, n_samples, rng, kind):
    n, k = aut.n, aut.alphabet_size
    cum = np.cumsum(measure.matrix, axis=1)
    if kind == "entry":
        sym = np.searchsorted(np.cumsum(measure.stationary), rng.random(n_samples), side="right")
        sym = np.minimum(sym, k - 1)
        state = aut.step[0, sym]
        counts = (state == n).astype(np.int64)
        steps = tau + n - 2
    else:
        sym = np.full(n_samples, aut.pattern[-1])
        state = np.full(n_samples, n)
        counts = np.zeros(n_samples, dtype=np.int64)
        steps = tau
    for _ in range(steps):
        u = rng.random(n_samples)
        sym = np.minimum((u[:, None] >= cum[sym]).sum(axis=1), k - 1)
        state = aut.step[state, sym]
        counts += state == n
    return np.bincount(np.minimum(counts, K), minlength=K + 1)


def monte_carlo_distribution(system: ShiftSystem, measure: MeasureSpec, target: CylinderTarget | str | Sequence[int],
                             t: float | None = None, r_max: int = 10, n_samples: int = 10_000,
                             seed: int = 0, *, tau: int | None = None, kind: str = "entry",
                             method: str = "renewal", workers: int = 1, threads: int = 1) -> CountDistribution:
    """Empirical hit-count law from seeded simulation.

    ``method="orbit"`` simulates symbol strings step by step. ``method="renewal"``
    uses that the joint (automaton, symbol) state right after a hit is always
    the same, so hit times form a delayed renewal process: the first hit and
    the gaps between hits are drawn from their exact first-passage laws.
    Samples are split over ``workers`` independent streams spawned from
    ``seed``; the result depends only on ``seed`` and ``workers``.
    """
    if isinstance(target, CylinderTarget):
        word = target.word
        if tau is None:
            if t is None:
                raise ValueError("need t or tau")
            tau = observation_time(target, t)
    else:
        word = as_word(target)
        if tau is None:
            raise ValueError("tau is required when target is a bare word")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    measure.check_support(system)
    aut = HitCounterAutomaton.build(word, system.alphabet_size)
    n, k = aut.n, aut.alphabet_size
    K = r_max + 1
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(workers)]
    sizes = [n_samples // workers + (i < n_samples % workers) for i in range(workers)]

    if method == "renewal":
        S = (n + 1) * k
        after_hit = np.zeros(S)
        after_hit[n * k + word[-1]] = 1.0
        gaps = _first_passage(aut, measure, after_hit, tau) if tau else np.zeros(0)
        if kind == "entry":
            start = np.zeros(S)
            direct = np.zeros(1)
            for a in range(k):
                s = int(aut.step[0, a])
                if s == n:
                    direct[0] += measure.stationary[a]
                else:
                    start[s * k + a] += measure.stationary[a]
            # first hit at offset j means the automaton accepts after j + n - 1 symbols
            fp = _first_passage(aut, measure, start, max(tau + n - 2, 0))
            first = np.concatenate([direct, fp])[n - 1:n - 1 + tau] if tau else np.zeros(0)
        else:
            first = gaps
        job = lambda rng, size: _mc_renewal(aut, measure, tau, K, size, rng, first, gaps)
    elif method == "orbit":
        job = lambda rng, size: _mc_orbit(aut, measure, tau, K, size, rng, kind)
    else:
        raise ValueError(f"unknown method {method!r}")

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(job, streams, sizes))
    else:
        parts = [job(rng, size) for rng, size in zip(streams, sizes)]
    counts = np.sum(parts, axis=0)
    freq = counts / n_samples
    params = {"n": n, "tau": int(tau), "kind": kind, "seed": int(seed), "method": method}
    if t is not None:
        params["t"] = float(t)
    if isinstance(target, CylinderTarget):
        params["p"] = target.p
    return CountDistribution(freq[:K], float(freq[K]), "monte_carlo", int(n_samples), params)
