"""Config-driven experiments: convergence sweeps, oscillation search, condition checks.

A config is a YAML or JSON mapping. Common keys::

    experiment: entry_sweep | return_sweep | oscillation | condition_check | bound_profile
    system:  {alphabet_size: 2, transitions: [[1, 1], [1, 1]]}   # optional, full shift
    measure: {kind: bernoulli, weights: [0.3, 0.7]}
             # or {kind: markov, matrix: [[0.9, 0.1], [0.2, 0.8]]}
    target:  {word: "0"}               # one period of the periodic point (or the full word)
    n: [4, 12]                         # inclusive range, or {values: [...]}
    t: [1.0]
    r_max: 10
    method: exact | monte_carlo       # sweeps only
    mc: {samples: 100000, seed: 7}    # required when method is monte_carlo

Kind-specific sections (``oscillation``, ``condition``, ``bounds``) are
documented on the corresponding runner. Seeds are never defaulted.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import bounds
from .counting import BudgetError, count_distribution, monte_carlo_distribution
from .dist import CountDistribution, DistParams, limit_distribution, total_variation
from .patterns import rare_set_measure, rare_set_measure_bound, verify_condition_II
from .symbolic import (CylinderTarget, MeasureSpec, ShiftSystem, as_word, cylinder_measure,
                       make_target, measured_phi, minimal_period, observation_time, word_str)

SCHEMA_VERSION = 1
KINDS = ("entry_sweep", "return_sweep", "oscillation", "condition_check", "bound_profile")
SWEEP_COLUMNS = ("n", "t", "r", "exact", "limit", "abs_diff")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class PartialResultError(BudgetError):
    """A budget error raised mid-run; ``partial`` holds the rows finished so far."""

    def __init__(self, message: str, partial: "ExperimentResult"):
        super().__init__(message)
        self.partial = partial


# -- configuration ---------------------------------------------------------------

@dataclass
class ExperimentConfig:
    kind: str
    system: ShiftSystem
    measure: MeasureSpec
    word: tuple[int, ...] | None
    n_values: list[int]
    t_grid: list[float]
    r_max: int
    method: str
    mc_samples: int | None
    seed: int | None
    budget: float
    threads: int
    section: dict
    raw: dict = field(repr=False)

    @property
    def fingerprint(self) -> str:
        return config_fingerprint(self.raw)


def config_fingerprint(raw: dict) -> str:
    """sha256 of the canonical JSON form of a config mapping."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def load_config(path: str | Path) -> dict:
    """Read a YAML or JSON config file into a plain mapping."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)  # JSON is a subset of YAML
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: cannot parse config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing required key '{where}{key}'")
    return d[key]


def _int_list(v, key: str) -> list[int]:
    if isinstance(v, dict):
        v = _need(v, "values", f"{key}.")
        out = [int(x) for x in v]
    elif isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, int) for x in v):
        lo, hi = v
        if lo > hi:
            raise ConfigError(f"'{key}' range [{lo}, {hi}] is empty")
        out = list(range(lo, hi + 1))
    elif isinstance(v, int):
        out = [v]
    else:
        raise ConfigError(f"'{key}' must be an int, an inclusive [lo, hi] range or {{values: [...]}}")
    if any(x < 1 for x in out):
        raise ConfigError(f"'{key}' values must be >= 1")
    return out


def _float_list(v, key: str) -> list[float]:
    vals = v if isinstance(v, (list, tuple)) else [v]
    try:
        out = [float(x) for x in vals]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{key}' must be a number or a list of numbers") from exc
    if any(x < 0 or not math.isfinite(x) for x in out):
        raise ConfigError(f"'{key}' values must be finite and >= 0")
    return out


def _build_system(d: dict | None) -> ShiftSystem:
    if d is None:
        return ShiftSystem.full(2)
    try:
        k = int(_need(d, "alphabet_size", "system."))
        trans = d.get("transitions")
        return ShiftSystem.full(k) if trans is None else ShiftSystem(k, trans)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"system: {exc}") from exc


def _build_measure(d: dict, system: ShiftSystem) -> MeasureSpec:
    kind = _need(d, "kind", "measure.")
    try:
        if kind == "bernoulli":
            mu = MeasureSpec.bernoulli(_need(d, "weights", "measure."))
        elif kind == "markov":
            mu = MeasureSpec.markov(_need(d, "matrix", "measure."), d.get("stationary"))
        else:
            raise ConfigError(f"measure.kind must be 'bernoulli' or 'markov', got {kind!r}")
        mu.check_support(system)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"measure: {exc}") from exc
    return mu


def validate_config(raw: dict, *, seed: int | None = None, threads: int | None = None) -> ExperimentConfig:
    """Check a config mapping and build the typed config.

    ``seed`` and ``threads`` override the file values (command-line flags).
    """
    raw = copy.deepcopy(raw)
    if seed is not None:
        raw.setdefault("mc", {})["seed"] = int(seed)
    kind = _need(raw, "experiment", "")
    if kind not in KINDS:
        raise ConfigError(f"experiment must be one of {', '.join(KINDS)}; got {kind!r}")
    system = _build_system(raw.get("system"))
    if kind == "oscillation" and "measure" not in raw:
        w = (raw.get("oscillation") or {}).get("w", 0.3)
        measure = _build_measure({"kind": "bernoulli", "weights": [w, 1 - w]}, system)
    else:
        measure = _build_measure(_need(raw, "measure", ""), system)
    word = None
    if kind != "oscillation":
        tgt = _need(raw, "target", "")
        if not isinstance(tgt, dict) or "word" not in tgt:
            raise ConfigError("target must be a mapping with a 'word' entry")
        if not isinstance(tgt["word"], str):
            raise ConfigError("target.word must be a string; quote it in YAML (word: \"00\")")
        try:
            word = as_word(tgt["word"])
        except ValueError as exc:
            raise ConfigError(f"target.word: {exc}") from exc
        if not word or max(word) >= system.alphabet_size:
            raise ConfigError(f"target.word {tgt['word']!r} uses symbols outside the alphabet")
    n_values = _int_list(raw["n"], "n") if "n" in raw else []
    if word is not None:
        if not n_values:
            n_values = [len(word)]
        m = minimal_period(word)
        bad = [n for n in n_values if n < m]
        if bad:
            raise ConfigError(f"n={bad[0]} is below the minimal period {m} of target {word_str(word)}")
        for n in n_values:
            ext = tuple(word[i % m] for i in range(n + m))
            if not system.admissible(ext):
                raise ConfigError(f"periodic extension of {word_str(word[:m])} is not admissible")
    t_grid = _float_list(raw.get("t", [1.0]), "t")
    r_max = int(raw.get("r_max", 10))
    if r_max < 0:
        raise ConfigError("r_max must be >= 0")
    method = raw.get("method", "exact")
    if method not in ("exact", "monte_carlo"):
        raise ConfigError("method must be 'exact' or 'monte_carlo'")
    mc = raw.get("mc") or {}
    mc_samples = mc.get("samples")
    mc_seed = mc.get("seed")
    if method == "monte_carlo":
        if mc_seed is None:
            raise ConfigError("monte_carlo runs need an explicit mc.seed (or --seed)")
        if mc_samples is None or int(mc_samples) < 1:
            raise ConfigError("monte_carlo runs need mc.samples >= 1")
    budget = float(raw.get("budget", 5e10))
    n_threads = int(threads if threads is not None else raw.get("threads", 1))
    if n_threads < 1:
        raise ConfigError("threads must be >= 1")
    section = raw.get({"oscillation": "oscillation", "condition_check": "condition",
                       "bound_profile": "bounds"}.get(kind, "_none"), {}) or {}
    if not isinstance(section, dict):
        raise ConfigError("experiment section must be a mapping")
    return ExperimentConfig(kind, system, measure, word, n_values, t_grid, r_max, method,
                            None if mc_samples is None else int(mc_samples),
                            None if mc_seed is None else int(mc_seed),
                            budget, n_threads, section, raw)


# -- results and output ------------------------------------------------------------

@dataclass
class ExperimentResult:
    kind: str
    fingerprint: str
    columns: tuple[str, ...] = ()
    rows: list[tuple] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION} kind={self.kind} config_sha256={self.fingerprint}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in row])
        return buf.getvalue()

    def json_text(self) -> str:
        doc = {"schema_version": SCHEMA_VERSION, "kind": self.kind,
               "config_sha256": self.fingerprint, "summary": self.summary}
        return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"

    def write(self, out: str | Path) -> list[Path]:
        """Write ``<out>.csv`` (if there are rows) and ``<out>.json``; returns the paths."""
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        stem = out.with_suffix("") if out.suffix in (".csv", ".json") else out
        written = []
        if self.columns:
            p = stem.with_suffix(".csv")
            p.write_text(self.csv_text())
            written.append(p)
        p = stem.with_suffix(".json")
        p.write_text(self.json_text())
        written.append(p)
        return written


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def _run_cells(keys: list, fn: Callable, threads: int) -> tuple[dict, BudgetError | None]:
    """Evaluate ``fn`` on every key; stops at the first budget error."""
    done: dict = {}
    if threads <= 1:
        for k in keys:
            try:
                done[k] = fn(k)
            except BudgetError as exc:
                return done, exc
        return done, None
    err = None
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {k: pool.submit(fn, k) for k in keys}
        for k in keys:
            try:
                done[k] = futures[k].result()
            except BudgetError as exc:
                err = err or exc
    return done, err


# -- sweeps ----------------------------------------------------------------------

def _sweep_target(cfg: ExperimentConfig, n: int) -> CylinderTarget:
    return make_target(cfg.system, cfg.measure, cfg.word, n=n)


def _sweep_cell(cfg: ExperimentConfig, kind: str, key: tuple[int, float]) -> tuple[CylinderTarget, CountDistribution]:
    n, t = key
    target = _sweep_target(cfg, n)
    if cfg.method == "exact":
        tau = observation_time(target, t)
        d = count_distribution(cfg.system, cfg.measure, target.word, tau, cfg.r_max, kind,
                               budget=cfg.budget)
        d.params.update(t=t, p=target.p)
    else:
        d = monte_carlo_distribution(cfg.system, cfg.measure, target, t, cfg.r_max,
                                     n_samples=cfg.mc_samples, seed=cfg.seed, kind=kind)
    return target, d


def _sweep(cfg: ExperimentConfig, kind: str) -> ExperimentResult:
    keys = sorted((n, t) for n in cfg.n_values for t in cfg.t_grid)
    done, err = _run_cells(keys, lambda k: _sweep_cell(cfg, kind, k), cfg.threads)
    res = ExperimentResult(f"{kind}_sweep", cfg.fingerprint, SWEEP_COLUMNS)
    cells = []
    for key in keys:
        if key not in done:
            continue
        n, t = key
        target, d = done[key]
        d.validate(1e-9 if d.provenance == "exact" else 1e-12)
        lim = limit_distribution(DistParams(t, target.p), cfg.r_max, kind)
        a, b = d.folded(cfg.r_max), lim.folded(cfg.r_max)
        for r in range(cfg.r_max + 1):
            res.rows.append((n, t, r, float(a[r]), float(b[r]), float(abs(a[r] - b[r]))))
        cell = {"n": n, "t": t, "p": target.p, "tau": observation_time(target, t),
                "mu_n": target.mu_n, "tv": total_variation(d, lim, cfg.r_max),
                "provenance": d.provenance}
        if kind == "return":
            cell["p_zero"] = float(a[0])
            cell["p_zero_limit"] = (1 - target.p) * math.exp(-t)
            cell["p_zero_abs_diff"] = abs(cell["p_zero"] - cell["p_zero_limit"])
        cells.append(cell)
    res.summary = {"word": word_str(cfg.word), "r_max": cfg.r_max, "method": cfg.method,
                   "cells": cells, "complete": err is None}
    for t in cfg.t_grid:
        pts = [(c["n"], c["tv"]) for c in cells if c["t"] == t and c["tv"] > 0]
        if len(pts) >= 4:
            rate, r2 = bounds.fit_convergence_rate(pts)
            res.summary.setdefault("tv_fit", []).append({"t": t, "rate": rate, "r2": r2})
    if err is not None:
        raise PartialResultError(str(err), res)
    return res


def run_entry_sweep(config: ExperimentConfig) -> ExperimentResult:
    """Exact (or simulated) entry-count law against the Polya-Aeppli limit, per ``(n, t)``.

    CSV rows are ``(n, t, r, exact, limit, abs_diff)`` for ``r = 0..r_max``
    with the tail folded into ``r_max``; the JSON summary lists the total
    variation distance per cell and a log-linear fit of TV against ``n``.
    """
    return _sweep(config, "entry")


def run_return_sweep(config: ExperimentConfig) -> ExperimentResult:
    """As :func:`run_entry_sweep` for counts conditioned on starting in the cylinder.

    The summary additionally reports ``P(no return)`` against ``(1 - p) e^-t``.
    """
    return _sweep(config, "return")


# -- oscillation -----------------------------------------------------------------

@dataclass(frozen=True)
class OscillationSpec:
    """Search parameters for a point whose count law keeps switching limits.

    Blocks of ``0`` and ``1`` alternate; block ``j`` is grown until the
    entry-count law of the whole prefix is within ``epsilon / 3`` of the
    Polya-Aeppli law with cluster parameter ``w`` (odd ``j``) or ``1 - w``
    (even ``j``), for every ``t`` on an even grid in ``(0, t0]`` and every
    ``r <= r0``.
    """

    w: float
    t0: float = 1.0
    r0: int = 2
    epsilon: float | None = None
    n_max: int = 40
    blocks: int = 4
    t_points: int = 4
    budget: float = 5e10

    def __post_init__(self):
        if not 0 < self.w < 1:
            raise ConfigError("w must lie in (0, 1)")
        if self.w == 0.5:
            raise ConfigError("the two fixed points need different weights: w = 1/2 is not allowed")
        eps_max = abs(1 - 2 * self.w) / 3
        if self.epsilon is not None and not 0 < self.epsilon <= eps_max * (1 + 1e-12):
            raise ConfigError(f"epsilon must lie in (0, |p1 - p2|/3] = (0, {eps_max:g}]")
        if self.t0 <= 0 or self.r0 < 0 or self.n_max < 1 or self.blocks < 1 or self.t_points < 1:
            raise ConfigError("need t0 > 0, r0 >= 0, n_max >= 1, blocks >= 1, t_points >= 1")

    @property
    def p_values(self) -> tuple[float, float]:
        return self.w, 1 - self.w

    @property
    def eps(self) -> float:
        return self.epsilon if self.epsilon is not None else abs(1 - 2 * self.w) / 3

    @property
    def t_grid(self) -> list[float]:
        return [self.t0 * (i + 1) / self.t_points for i in range(self.t_points)]


def _law_distances(system, measure, word, spec: OscillationSpec) -> dict:
    """Sup distance (over the t grid and ``r <= r0``) and TV to both fixed-point laws."""
    target = make_target(system, measure, word)
    sup = [0.0, 0.0]
    tv = [0.0, 0.0]
    for t in spec.t_grid:
        tau = observation_time(target, t)
        d = count_distribution(system, measure, word, tau, spec.r0, "entry", budget=spec.budget)
        a = d.folded(spec.r0)
        for i, p in enumerate(spec.p_values):
            lim = limit_distribution(DistParams(t, p), spec.r0)
            b = lim.folded(spec.r0)
            pm = np.abs(d.probs[:spec.r0 + 1] - lim.probs[:spec.r0 + 1])
            sup[i] = max(sup[i], float(pm.max()))
            tv[i] = max(tv[i], 0.5 * float(np.abs(a - b).sum()))
    return {"p": target.p, "mu_n": target.mu_n, "sup": sup, "tv": tv}


def run_oscillation(spec: OscillationSpec, system: ShiftSystem | None = None,
                    fingerprint: str | None = None) -> ExperimentResult:
    """Greedy block construction of a point with two competing limit laws.

    The observation time of each prefix uses the prefix's own measure and
    cluster parameter. The result has one CSV row per accepted block and a
    summary with every candidate's distances and the verdict: oscillation is
    confirmed when the law the blocks are close to switches at least 3 times.
    Running out of ``n_max`` or of budget ends the search with the blocks
    found so far.
    """
    system = system or ShiftSystem.full(2)
    measure = MeasureSpec.bernoulli([spec.w, 1 - spec.w])
    eps = spec.eps
    prefix: list[int] = []
    blocks, trace = [], []
    stop = None
    for j in range(1, spec.blocks + 1):
        sym, want = (j + 1) % 2, (j + 1) % 2
        found = None
        k = 1
        while len(prefix) + k <= spec.n_max:
            word = tuple(prefix + [sym] * k)
            try:
                info = _law_distances(system, measure, word, spec)
            except BudgetError as exc:
                stop = f"budget exhausted in block {j} at n={len(word)}: {exc}"
                break
            trace.append({"block": j, "n": len(word), "sup_p1": info["sup"][0], "sup_p2": info["sup"][1]})
            if info["sup"][want] < eps / 3:
                found = (word, info)
                break
            k += 1
        if found is None:
            stop = stop or f"no length <= n_max={spec.n_max} brings block {j} within eps/3"
            break
        word, info = found
        prefix = list(word)
        within = [s < eps for s in info["sup"]]
        label = want if within[want] else (1 - want if within[1 - want] else None)
        blocks.append({"block": j, "n": len(word), "symbol": sym, "target_p": spec.p_values[want],
                       "law": label, "sup": info["sup"], "tv": info["tv"], "p_word": info["p"],
                       "mu_n": info["mu_n"]})
    alternations = sum(1 for a, b in zip(blocks, blocks[1:])
                       if a["law"] is not None and b["law"] is not None and a["law"] != b["law"])
    res = ExperimentResult("oscillation", fingerprint or config_fingerprint(_spec_dict(spec)),
                           ("block", "n", "target_p", "sup_p1", "sup_p2", "tv_p1", "tv_p2"))
    for b in blocks:
        res.rows.append((b["block"], b["n"], b["target_p"], b["sup"][0], b["sup"][1], b["tv"][0], b["tv"][1]))
    res.summary = {"spec": _spec_dict(spec), "epsilon": eps, "p1": spec.p_values[0],
                   "p2": spec.p_values[1], "blocks": blocks, "alternations": alternations,
                   "verdict": alternations >= 3, "stopped": stop, "trace": trace,
                   "word": word_str(prefix)}
    return res


def _spec_dict(spec: OscillationSpec) -> dict:
    return {"w": spec.w, "t0": spec.t0, "r0": spec.r0, "epsilon": spec.epsilon, "n_max": spec.n_max,
            "blocks": spec.blocks, "t_points": spec.t_points, "budget": spec.budget}


def oscillation_spec_from_config(cfg: ExperimentConfig) -> OscillationSpec:
    s = cfg.section
    try:
        w = float(_need(s, "w", "oscillation."))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"oscillation.w: {exc}") from exc
    return OscillationSpec(w=w, t0=float(s.get("t0", 1.0)), r0=int(s.get("r0", 2)),
                           epsilon=s.get("epsilon"), n_max=int(s.get("n_max", 40)),
                           blocks=int(s.get("blocks", 4)), t_points=int(s.get("t_points", 4)),
                           budget=cfg.budget)


# -- condition check -------------------------------------------------------------

def _phi_profile(system, measure, n: int, gaps: list[int]) -> dict:
    vals = [measured_phi(system, measure, n, g) for g in gaps]
    out = {"gaps": gaps, "phi": vals}
    pos = [(g, v) for g, v in zip(gaps, vals) if v > 1e-14]
    if len(pos) >= 2:
        slope = np.polyfit([g for g, _ in pos], np.log([v for _, v in pos]), 1)[0]
        out["decay_ratio"] = float(math.exp(slope))
    return out


def run_condition_check(cfg: ExperimentConfig) -> ExperimentResult:
    """Check the three hypotheses of the approximation bound on one target.

    Section ``condition``: ``n`` (word length, default ``len(word)``), ``tau``
    or ``t``, ``r_max`` (default 3), ``delta`` (default ``n``), ``exact``
    (default false), ``C0``, ``samples_per_r``, ``phi_gaps`` (default 0..10).
    """
    s = cfg.section
    n = int(s.get("n", cfg.n_values[0]))
    target = make_target(cfg.system, cfg.measure, cfg.word, n=n)
    tau = int(s["tau"]) if "tau" in s else observation_time(target, float(s.get("t", cfg.t_grid[0])))
    r_max = int(s.get("r_max", 3))
    delta = int(s.get("delta", n))
    if delta < 1:
        raise ConfigError("condition.delta must be >= 1")
    pi, P = cfg.measure.stationary, cfg.measure.matrix
    inv_residual = float(np.abs(pi @ P - pi).max())
    cond2 = verify_condition_II(cfg.system, cfg.measure, target, tau, r_max, delta,
                                sample_patterns_per_r=s.get("samples_per_r"),
                                exact=bool(s.get("exact", False)), C0=float(s.get("C0", 1.0)))
    mu_m = cylinder_measure(cfg.system, cfg.measure, target.word[:target.m])
    rare = []
    for r in range(2, r_max + 1):
        if math.comb(tau, r) > 10 ** 6:
            rare.append({"r": r, "skipped": "enumeration over budget"})
            continue
        meas = rare_set_measure(cfg.system, cfg.measure, target, tau, r, delta)
        bound = rare_set_measure_bound(tau, r, delta, target.mu_n, mu_m)
        rare.append({"r": r, "measure": meas, "bound": bound, "ok": meas <= bound * (1 + 1e-12)})
    gaps = [int(g) for g in s.get("phi_gaps", range(0, 11))]
    phi = _phi_profile(cfg.system, cfg.measure, n, gaps)
    res = ExperimentResult("condition_check", cfg.fingerprint)
    res.summary = {
        "target": word_str(target.word), "n": n, "m": target.m, "tau": tau, "delta": delta,
        "condition_I": {"stationarity_residual": inv_residual, "passed": inv_residual < 1e-12},
        "condition_II": cond2,
        "condition_III": {"rare_sets": rare,
                          "passed": all(x.get("ok", True) for x in rare)},
        "phi_profile": phi,
    }
    return res


# -- bound profile ----------------------------------------------------------------

def run_bound_profile(cfg: ExperimentConfig) -> ExperimentResult:
    """Evaluate the entry-count error bound next to the observed error, per ``n``.

    Section ``bounds``: ``r`` (default 1), ``C`` (default 1), ``delta_grid``
    (default ``n..4n``). ``delta`` is chosen per ``n`` by grid minimisation.
    """
    s = cfg.section
    r = int(s.get("r", 1))
    C = float(s.get("C", 1.0))
    res = ExperimentResult("bound_profile", cfg.fingerprint,
                           ("n", "t", "r", "delta", "bound", "observed"))
    fits = {"bound": [], "observed": []}
    for t in cfg.t_grid:
        pts_b, pts_o = [], []
        for n in cfg.n_values:
            target = _sweep_target(cfg, n)
            grid = [int(x) for x in s.get("delta_grid", range(n, 4 * n + 1))]
            phi = {d: measured_phi(cfg.system, cfg.measure, n, max(d - n, 0)) for d in grid}

            def f(d, target=target, phi=phi):
                return bounds.theorem7_bound(target.n, target.m, target.p, target.q_n, target.mu_n,
                                             d, phi[int(d)], t, r, C)
            delta, value = bounds.optimize_delta(f, grid)
            tau = observation_time(target, t)
            d = count_distribution(cfg.system, cfg.measure, target.word, tau, max(r, cfg.r_max),
                                   "entry", budget=cfg.budget)
            lim = limit_distribution(DistParams(t, target.p), max(r, cfg.r_max))
            observed = abs(float(d.probs[r]) - float(lim.probs[r]))
            res.rows.append((n, t, r, int(delta), value, observed))
            pts_b.append((n, value))
            if observed > 0:
                pts_o.append((n, observed))
        for name, pts in (("bound", pts_b), ("observed", pts_o)):
            if len(pts) >= 4:
                rate, r2 = bounds.fit_convergence_rate(pts)
                fits[name].append({"t": t, "rate": rate, "r2": r2})
    res.summary = {"word": word_str(cfg.word), "r": r, "C": C, "fits": fits}
    return res


def run(cfg: ExperimentConfig) -> ExperimentResult:
    """Dispatch on ``cfg.kind``."""
    if cfg.kind == "entry_sweep":
        return run_entry_sweep(cfg)
    if cfg.kind == "return_sweep":
        return run_return_sweep(cfg)
    if cfg.kind == "oscillation":
        return run_oscillation(oscillation_spec_from_config(cfg), cfg.system, cfg.fingerprint)
    if cfg.kind == "condition_check":
        return run_condition_check(cfg)
    return run_bound_profile(cfg)


def run_config(raw: dict[str, Any], **overrides) -> ExperimentResult:
    return run(validate_config(raw, **overrides))
