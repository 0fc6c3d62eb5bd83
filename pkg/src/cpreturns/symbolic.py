"""Shift spaces, Bernoulli/Markov measures and cylinders around periodic points."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

Word = tuple[int, ...]


def as_word(word: str | Sequence[int]) -> Word:
    """Normalise ``"0110"`` or ``[0, 1, 1, 0]`` to a tuple of ints."""
    if isinstance(word, str):
        return tuple(int(c) for c in word)
    return tuple(int(a) for a in word)


def word_str(word: Sequence[int]) -> str:
    return "".join(str(a) for a in word) if max(word, default=0) < 10 else ",".join(map(str, word))


@dataclass(frozen=True, eq=False)
class ShiftSystem:
    """Subshift of finite type on ``alphabet_size`` symbols.

    ``transitions[a, b] == 1`` when ``b`` may follow ``a``.
    """

    alphabet_size: int
    transitions: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.transitions, dtype=np.int8)
        object.__setattr__(self, "transitions", A)
        k = self.alphabet_size
        if k < 2:
            raise ValueError("alphabet_size must be >= 2")
        if A.shape != (k, k) or not np.isin(A, (0, 1)).all():
            raise ValueError(f"transitions must be a {k}x{k} 0/1 matrix")
        if (A.sum(axis=0) == 0).any() or (A.sum(axis=1) == 0).any():
            raise ValueError("every symbol needs at least one predecessor and one successor")

    @classmethod
    def full(cls, alphabet_size: int = 2) -> "ShiftSystem":
        return cls(alphabet_size, np.ones((alphabet_size, alphabet_size), dtype=np.int8))

    @property
    def is_full(self) -> bool:
        return bool(self.transitions.all())

    def is_primitive(self) -> bool:
        k = self.alphabet_size
        B = self.transitions.astype(np.int64)
        P = np.eye(k, dtype=np.int64)
        # Wielandt: a primitive k x k matrix has A^((k-1)^2 + 1) > 0
        for _ in range((k - 1) ** 2 + 1):
            P = np.minimum(P @ B, 1)
        return bool(P.all())

    def admissible(self, word: Sequence[int]) -> bool:
        w = as_word(word)
        if any(a < 0 or a >= self.alphabet_size for a in w):
            return False
        return all(self.transitions[a, b] for a, b in zip(w, w[1:]))

    def words(self, n: int) -> Iterable[Word]:
        """All admissible words of length ``n`` in lexicographic order."""
        for w in itertools.product(range(self.alphabet_size), repeat=n):
            if self.admissible(w):
                yield w


def _stationary(P: np.ndarray) -> np.ndarray:
    k = P.shape[0]
    A = np.vstack([P.T - np.eye(k), np.ones(k)])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(A, b, rcond=None)[0]
    return pi


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """Invariant Bernoulli or Markov measure.

    Both kinds expose an initial vector ``stationary`` and a stochastic
    ``matrix``; for Bernoulli every row of ``matrix`` equals ``weights``.
    """

    kind: str
    weights: np.ndarray
    matrix: np.ndarray
    stationary: np.ndarray

    @classmethod
    def bernoulli(cls, weights: Sequence[float]) -> "MeasureSpec":
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size < 2 or (w <= 0).any() or abs(w.sum() - 1) > 1e-12:
            raise ValueError(f"Bernoulli weights must be positive and sum to 1, got {weights}")
        return cls("bernoulli", w, np.tile(w, (w.size, 1)), w.copy())

    @classmethod
    def markov(cls, matrix: Sequence[Sequence[float]], stationary: Sequence[float] | None = None) -> "MeasureSpec":
        P = np.asarray(matrix, dtype=float)
        k = P.shape[0]
        if P.shape != (k, k) or (P < 0).any() or np.abs(P.sum(axis=1) - 1).max() > 1e-12:
            raise ValueError("Markov matrix must be square, non-negative and row-stochastic")
        pi = _stationary(P) if stationary is None else np.asarray(stationary, dtype=float)
        if (pi <= 0).any() or abs(pi.sum() - 1) > 1e-12 or np.abs(pi @ P - pi).max() > 1e-12:
            raise ValueError("stationary vector must be positive, normalised and invariant")
        return cls("markov", pi, P, pi)

    @property
    def alphabet_size(self) -> int:
        return self.matrix.shape[0]

    def check_support(self, system: ShiftSystem) -> None:
        if system.alphabet_size != self.alphabet_size:
            raise ValueError("measure and shift disagree on the alphabet size")
        if self.kind == "bernoulli" and not system.is_full:
            raise ValueError("a Bernoulli measure is only invariant on the full shift")
        if ((self.matrix > 0) & (system.transitions == 0)).any():
            raise ValueError("Markov measure charges transitions the shift forbids")

    # Exact (rational) views. Each float is read as its shortest decimal
    # representation, so inputs such as 0.9 become exactly 9/10; rows are
    # renormalised to sum to exactly 1 and the Markov stationary vector is
    # re-solved in rational arithmetic.
    @property
    def exact_stationary(self) -> list[Fraction]:
        if self.kind == "bernoulli":
            return _frac_mat(self.matrix.tobytes(), self.alphabet_size)[0]
        return _frac_stationary(self.matrix.tobytes(), self.alphabet_size)

    @property
    def exact_matrix(self) -> list[list[Fraction]]:
        return _frac_mat(self.matrix.tobytes(), self.matrix.shape[0])

    def transition_power(self, g: int, exact: bool = False):
        """``g``-step transition matrix; rank-one (hence exact) for Bernoulli."""
        if g < 0:
            raise ValueError("g must be >= 0")
        k = self.alphabet_size
        if exact:
            if g == 0:
                return [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]
            if self.kind == "bernoulli":
                w = self.exact_stationary
                return [list(w) for _ in range(k)]
            return _frac_matrix_power(self.matrix.tobytes(), k, g)
        if g == 0:
            return np.eye(k)
        if self.kind == "bernoulli":
            return self.matrix.copy()
        return np.linalg.matrix_power(self.matrix, g)


@lru_cache(maxsize=None)
def _frac_mat(buf: bytes, k: int) -> list[list[Fraction]]:
    a = np.frombuffer(buf, dtype=float).reshape(k, k)
    rows = [[Fraction(repr(float(x))) for x in row] for row in a]
    return [[x / sum(row) for x in row] for row in rows]


@lru_cache(maxsize=None)
def _frac_stationary(buf: bytes, k: int) -> list[Fraction]:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` by rational Gaussian elimination."""
    P = _frac_mat(buf, k)
    # unknowns pi_0..pi_{k-1}; equations: (P^T - I) pi = 0 with the last row replaced by normalisation
    A = [[P[j][i] - (i == j) for j in range(k)] + [Fraction(0)] for i in range(k)]
    A[-1] = [Fraction(1)] * k + [Fraction(1)]
    for col in range(k):
        piv = next(r for r in range(col, k) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        for r in range(k):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [A[i][k] / A[i][i] for i in range(k)]


def _frac_matmul(A, B):
    k = len(A)
    return [[sum((A[i][l] * B[l][j] for l in range(k)), Fraction(0)) for j in range(k)] for i in range(k)]


@lru_cache(maxsize=256)
def _frac_matrix_power(buf: bytes, k: int, g: int):
    if g == 1:
        return _frac_mat(buf, k)
    half = _frac_matrix_power(buf, k, g // 2)
    out = _frac_matmul(half, half)
    if g % 2:
        out = _frac_matmul(out, _frac_mat(buf, k))
    return out


def pinned_measure(system: ShiftSystem, measure: MeasureSpec, pins: dict[int, int], exact: bool = False):
    """Measure of the set of sequences with prescribed symbols at given coordinates.

    Coordinates between pins are free; their contribution is a power of the
    transition matrix. Returns 0 when a symbol is out of range.
    """
    zero = Fraction(0) if exact else 0.0
    if not pins:
        return Fraction(1) if exact else 1.0
    coords = sorted(pins)
    if any(not 0 <= pins[c] < system.alphabet_size for c in coords):
        return zero
    first = pins[coords[0]]
    val = measure.exact_stationary[first] if exact else float(measure.stationary[first])
    if exact:
        P = measure.exact_matrix
    for a, b in zip(coords, coords[1:]):
        x, y = pins[a], pins[b]
        if b - a == 1:
            step = P[x][y] if exact else measure.matrix[x, y]
            if not system.transitions[x, y]:
                return zero
        else:
            Pg = measure.transition_power(b - a, exact)
            step = Pg[x][y] if exact else Pg[x, y]
        if step == 0:
            return zero
        val = val * step
    return val


def cylinder_measure(system: ShiftSystem, measure: MeasureSpec, word: str | Sequence[int],
                     exact: bool = False):
    """``mu`` of the cylinder of ``word``; 0 when the word is inadmissible."""
    w = as_word(word)
    if not w:
        return Fraction(1) if exact else 1.0
    if not system.admissible(w):
        return Fraction(0) if exact else 0.0
    return pinned_measure(system, measure, dict(enumerate(w)), exact)


def minimal_period(word: str | Sequence[int]) -> int:
    w = as_word(word)
    if not w:
        raise ValueError("empty word has no period")
    n = len(w)
    for m in range(1, n + 1):
        if all(w[i] == w[i % m] for i in range(n)):
            return m
    return n  # pragma: no cover


def self_overlaps(word: str | Sequence[int]) -> set[int]:
    """Shifts ``l`` in ``[1, n-1]`` at which the word overlaps itself consistently."""
    w = as_word(word)
    n = len(w)
    return {l for l in range(1, n) if w[l:] == w[:n - l]}


def periodic_extension(base: Sequence[int], n: int) -> Word:
    b = as_word(base)
    return tuple(b[i % len(b)] for i in range(n))


def cluster_parameter(system: ShiftSystem, measure: MeasureSpec, periodic_word: str | Sequence[int],
                      n: int, exact: bool = False):
    """Cluster parameter ``p`` and ratio defect ``q_n`` at a periodic point.

    ``periodic_word`` is any prefix of the periodic point that contains a full
    period. For Bernoulli and Markov measures the ratio
    ``mu(A_{l+m}) / mu(A_l)`` is the product of the weights (transition
    probabilities) around one period for every ``l >= 1``, so ``q_n`` is
    evaluated exactly over one period of ``l`` values.
    """
    w = as_word(periodic_word)
    m = minimal_period(w)
    base = w[:m]
    if n < m:
        raise ValueError(f"n={n} is shorter than the minimal period {m}")
    cyc = base + base[:1]
    if not system.admissible(cyc):
        raise ValueError(f"periodic extension of {word_str(base)} is not admissible")
    P = measure.exact_matrix
    p_exact = Fraction(1)
    for a, b in zip(cyc, cyc[1:]):
        p_exact *= P[a][b]
    if p_exact == 0:
        raise ValueError(f"periodic point {word_str(base)}^inf has zero cylinder measures")
    q = Fraction(0)
    l0 = max(n, 1)
    for l in range(l0, l0 + m):
        num = cylinder_measure(system, measure, periodic_extension(base, l + m), exact=True)
        den = cylinder_measure(system, measure, periodic_extension(base, l), exact=True)
        q = max(q, abs(num / den - p_exact))
    if exact:
        return p_exact, q
    return float(p_exact), float(q)


@dataclass(frozen=True)
class CylinderTarget:
    """Length-``n`` cylinder around the periodic point with base ``word[:m]``."""

    word: Word
    m: int
    p: float
    q_n: float
    mu_n: float

    @property
    def n(self) -> int:
        return len(self.word)

    @property
    def M(self) -> int:
        """Immediate-return horizon ``n - m``."""
        return self.n - self.m

    def tau(self, t: float) -> int:
        return observation_time(self, t)


def make_target(system: ShiftSystem, measure: MeasureSpec, word: str | Sequence[int],
                n: int | None = None) -> CylinderTarget:
    """Cylinder target for ``word``; if ``n`` is given the word is extended periodically."""
    w = as_word(word)
    measure.check_support(system)
    m = minimal_period(w)
    if n is not None:
        if n < m:
            raise ValueError(f"n={n} is below the minimal period {m} of {word_str(w)}")
        w = periodic_extension(w[:m], n)
    if not system.admissible(w):
        raise ValueError(f"word {word_str(w)} is not admissible")
    p, q = cluster_parameter(system, measure, w, len(w))
    mu = cylinder_measure(system, measure, w)
    if not (0 < p < 1) or mu <= 0:
        raise ValueError("degenerate target: need 0 < p < 1 and positive cylinder measure")
    return CylinderTarget(w, m, p, q, mu)


def observation_time(target: CylinderTarget, t: float) -> int:
    """``floor(t / ((1 - p) mu(A_n)))``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return int(math.floor(t / ((1 - target.p) * target.mu_n)))


@dataclass(frozen=True)
class MixingSpec:
    """Mixing rate ``phi`` (non-increasing) and separation function ``f`` (non-decreasing)."""

    phi: Callable[[int], float]
    f: Callable[[int], int] = lambda n: 0

    def check_monotone(self, upto: int = 50) -> bool:
        ph = [self.phi(k) for k in range(upto)]
        ff = [self.f(k) for k in range(1, upto)]
        return (all(a >= b for a, b in zip(ph, ph[1:])) and all(x >= 0 for x in ph)
                and all(a <= b for a, b in zip(ff, ff[1:])))


def _pair_ratio(system, measure, u: Word, v: Word, gap: int) -> float:
    n = len(u)
    mu_u = cylinder_measure(system, measure, u)
    mu_v = cylinder_measure(system, measure, v)
    if mu_u == 0 or mu_v == 0:
        return 0.0
    pins = dict(enumerate(u))
    pins.update({n + gap + i: a for i, a in enumerate(v)})
    return abs(pinned_measure(system, measure, pins) / (mu_u * mu_v) - 1.0)


def measured_phi(system: ShiftSystem, measure: MeasureSpec, n: int, gap: int,
                 pairs: Iterable[tuple[Sequence[int], Sequence[int]]] | None = None,
                 max_pairs: int = 4096, seed: int = 0) -> float:
    """Largest ``|mu(U & T^-(gap+n) V) / (mu(U) mu(V)) - 1|`` over pairs of n-cylinders.

    The default pair family is every admissible pair when there are at most
    ``max_pairs`` of them, otherwise a seeded random subsample of that size.
    """
    if measure.kind == "bernoulli":
        return 0.0
    if pairs is None:
        words = list(system.words(n))
        total = len(words) ** 2
        if total <= max_pairs:
            pairs = itertools.product(words, words)
        else:
            rng = np.random.default_rng(seed)
            idx = rng.choice(total, size=max_pairs, replace=False)
            pairs = ((words[i // len(words)], words[i % len(words)]) for i in np.sort(idx))
    return max((_pair_ratio(system, measure, as_word(u), as_word(v), gap) for u, v in pairs),
               default=0.0)
