"""Entry and return hit counts for cylinders at periodic points of mixing shifts.

Closed-form Polya-Aeppli laws live in :mod:`cpreturns.dist`, exact and
simulated hit-count laws in :mod:`cpreturns.counting`, the hit-pattern
combinatorics in :mod:`cpreturns.patterns`, error-bound evaluators in
:mod:`cpreturns.bounds` and the config-driven experiments in
:mod:`cpreturns.experiments`.
"""

from .bounds import (BoundInputs, fit_convergence_rate, optimize_delta, prop1_bound,
                     theorem7_bound, return_count_bound)
from .counting import (BudgetError, HitCounterAutomaton, brute_force_distribution, count_distribution,
                       exact_entry_distribution, exact_return_distribution, monte_carlo_distribution)
from .dist import (CountDistribution, DistParams, DomainError, QuadratureError, entry_P, entry_pgf,
                   entry_pmf, entry_return_integral_check, factorial_moment, limit_distribution,
                   moments, pmf, pmf_array, return_P_hat, return_pgf, return_pmf, sample,
                   total_variation)
from .experiments import (ConfigError, ExperimentConfig, OscillationSpec, load_config,
                          run_bound_profile, run_condition_check, run_entry_sweep, run_oscillation,
                          run_return_sweep, validate_config)
from .patterns import (HitPattern, cardinality_bound, classify, enumerate_patterns, rare_set_bound,
                       verify_condition_II)
from .symbolic import (CylinderTarget, MeasureSpec, MixingSpec, ShiftSystem, cluster_parameter,
                       cylinder_measure, make_target, measured_phi, observation_time)

__version__ = "0.1.0"
