"""Concrete Feynman-Kac models used for testing and demonstration."""

from wastefree.problems.latin import (
    latin_fk,
    latin_score,
    latin_stopping_exponent,
    log_num_permutation_squares,
)
from wastefree.problems.logistic import LogisticModel, load_sonar, logistic_fk, logistic_log_likelihood, synthetic_logistic
from wastefree.problems.nested_uniform import (
    NestedUniformModel,
    critical_k,
    inflation_std,
    inflation_std_limit,
    inflation_wf,
    nested_uniform_fk,
)
from wastefree.problems.orthant import CholeskyFailure, OrthantModel, ar1_correlation, orthant_constraint, orthant_fk

__all__ = [
    "CholeskyFailure",
    "LogisticModel",
    "NestedUniformModel",
    "OrthantModel",
    "ar1_correlation",
    "critical_k",
    "inflation_std",
    "inflation_std_limit",
    "inflation_wf",
    "latin_fk",
    "latin_score",
    "latin_stopping_exponent",
    "load_sonar",
    "log_num_permutation_squares",
    "logistic_fk",
    "logistic_log_likelihood",
    "nested_uniform_fk",
    "orthant_constraint",
    "orthant_fk",
    "synthetic_logistic",
]
