"""Bayesian logistic regression, tempered from the prior to the posterior."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from wastefree.adaptation import TemperedModel
from wastefree.kernels import RWMKernel, calibrate_rwm

__all__ = [
    "LogisticModel",
    "standardize_predictors",
    "load_sonar",
    "synthetic_logistic",
    "logistic_log_likelihood",
    "logistic_log_prior",
    "logistic_fk",
]

INTERCEPT_SD = 20.0
COEF_SD = 5.0
PREDICTOR_SD = 0.5
SONAR_SHAPE = (208, 61)


@dataclass(frozen=True)
class LogisticModel:
    """Design matrix ``z`` (intercept first), responses ``y`` in {-1, +1}, prior sds."""

    design: np.ndarray
    responses: np.ndarray
    prior_sd: np.ndarray

    def __post_init__(self):
        n, d = self.design.shape
        if self.responses.shape != (n,):
            raise ValueError(f"{self.responses.shape[0]} responses for {n} rows")
        if not np.all(np.isin(self.responses, (-1, 1))):
            raise ValueError("responses must be -1 or +1")
        if self.prior_sd.shape != (d,):
            raise ValueError("one prior sd per coefficient")

    @property
    def dim(self) -> int:
        return self.design.shape[1]

    @classmethod
    def from_raw(cls, predictors, responses) -> "LogisticModel":
        z = standardize_predictors(predictors)
        d = z.shape[1]
        prior_sd = np.full(d, COEF_SD)
        prior_sd[0] = INTERCEPT_SD
        return cls(z, np.asarray(responses, dtype=float), prior_sd)


def standardize_predictors(predictors) -> np.ndarray:
    """Centre each column, scale it to sd 0.5 and prepend an intercept column."""
    x = np.asarray(predictors, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    sd = x.std(axis=0)
    if np.any(sd == 0.0):
        raise ValueError("constant predictor column")
    z = PREDICTOR_SD * (x - x.mean(axis=0)) / sd
    return np.column_stack([np.ones(len(z)), z])


def load_sonar(path) -> LogisticModel:
    """Read the sonar CSV: 60 numeric fields then a label, ``R`` (+1) or ``M`` (-1)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if len(rows) != SONAR_SHAPE[0] or any(len(r) != SONAR_SHAPE[1] for r in rows):
        raise ValueError(f"{path}: expected {SONAR_SHAPE[0]} rows of {SONAR_SHAPE[1]} fields")
    labels = [r[-1].strip() for r in rows]
    bad = sorted(set(labels) - {"R", "M"})
    if bad:
        raise ValueError(f"{path}: unknown labels {bad}")
    x = np.array([[float(v) for v in r[:-1]] for r in rows])
    y = np.where(np.array(labels) == "R", 1.0, -1.0)
    return LogisticModel.from_raw(x, y)


def synthetic_logistic(n: int, n_predictors: int, seed: int) -> LogisticModel:
    """Small simulated data set with a known coefficient vector."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n_predictors))
    z = standardize_predictors(x)
    beta = np.concatenate([[0.5], rng.normal(0.0, 1.0, n_predictors)])
    prob = 1.0 / (1.0 + np.exp(-z @ beta))
    y = np.where(rng.random(n) < prob, 1.0, -1.0)
    return LogisticModel.from_raw(x, y)


def logistic_log_likelihood(x, model: LogisticModel) -> np.ndarray:
    """``sum_i log F(y_i x^T z_i)`` for each row of ``x``, with ``F`` the logistic cdf."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    margins = (x @ model.design.T) * model.responses
    return -np.logaddexp(0.0, -margins).sum(axis=1)


def logistic_log_prior(x, model: LogisticModel) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s = model.prior_sd
    return -0.5 * np.sum((x / s) ** 2, axis=1) - np.sum(np.log(s)) - 0.5 * model.dim * np.log(2 * np.pi)


def logistic_fk(model: LogisticModel, alpha: float = 0.5, scale: float | None = None) -> TemperedModel:
    """Tempering sequence prior -> posterior, moved by calibrated random-walk Metropolis."""

    def sample_prior(n, rng):
        return rng.standard_normal((n, model.dim)) * model.prior_sd

    def build_kernel(log_target, gamma, x):
        return RWMKernel(log_target, calibrate_rwm(x, scale))

    return TemperedModel(
        sample_prior,
        lambda x: logistic_log_prior(x, model),
        lambda x: logistic_log_likelihood(x, model),
        build_kernel,
        alpha=alpha,
    )
