"""Finite-population random matching: samplers, exact oracle, dynamics and tests.

Types and agents are 0-based, as in the C++ library. Exact probabilities are
returned as :class:`fractions.Fraction`.
"""

from fractions import Fraction

from . import _matchsim
from ._matchsim import (
    MatchsimError,
    ModelParams,
    cross_section_product_test,
    empirical_distribution,
    enumerate_full_matchings,
    evolve,
    hardy_weinberg_params,
    marginal_law_test,
    markov_ci_test,
    pairwise_independence_test,
    period_transition,
    plan_partial_matching,
    run_cli,
    sample_full_matching,
    sample_partial_matching,
    simulate,
    steady_state,
)

__all__ = [
    "MatchsimError",
    "ModelParams",
    "cross_section_product_test",
    "empirical_distribution",
    "enumerate_full_matchings",
    "evolve",
    "exact_joint_probability",
    "exact_pair_probability",
    "exact_set_probability",
    "hardy_weinberg_params",
    "marginal_law_test",
    "markov_ci_test",
    "pairwise_independence_test",
    "partial_space",
    "perfect_matching_count",
    "period_transition",
    "plan_partial_matching",
    "run_cli",
    "sample_full_matching",
    "sample_partial_matching",
    "simulate",
    "steady_state",
]


def _fraction(pair):
    num, den = pair
    return Fraction(int(num), int(den))


def perfect_matching_count(n):
    return int(_matchsim.perfect_matching_count(n))


def exact_pair_probability(n, i, j):
    return _fraction(_matchsim.exact_pair_probability(n, i, j))


def exact_joint_probability(n, i, j, i2, j2):
    return _fraction(_matchsim.exact_joint_probability(n, i, j, i2, j2))


def exact_set_probability(n, i, subset):
    return _fraction(_matchsim.exact_set_probability(n, i, list(subset)))


def partial_space(counts, unmatched):
    """Exact law of the partner type for every agent.

    Returns a dict with ``sample_points``, ``marginals`` (per agent, one
    Fraction per type followed by the unmatched outcome) and ``defect``.
    """
    raw = _matchsim.partial_space(list(counts), list(unmatched))
    return {
        "sample_points": raw["sample_points"],
        "marginals": [[_fraction(p) for p in row] for row in raw["marginals"]],
        "defect": _fraction(raw["defect"]),
    }
