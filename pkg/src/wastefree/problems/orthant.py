"""Gaussian orthant probabilities ``P(Z >= a)``, ``Z ~ N(0, Sigma)``.

With ``Sigma = Gamma Gamma^T`` (lower Cholesky), ``Z = Gamma X`` for
``X ~ N(0, I)`` and the event becomes ``X_t >= f_t(X_{1:t-1})`` for each
``t``. Particles are built one coordinate at a time: ``X_t`` is drawn from
N(0, 1) truncated to ``[f_t, inf)`` and weighted by ``Phi(-f_t)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from wastefree.core import FeynmanKacModel
from wastefree.distributions import log_normal_cdf_neg, truncated_normal_lower
from wastefree.kernels import OrthantGibbsKernel

__all__ = [
    "CholeskyFailure",
    "OrthantModel",
    "OrthantFK",
    "orthant_constraint",
    "orthant_fk",
    "ar1_correlation",
    "load_matrix_csv",
]


class CholeskyFailure(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class OrthantModel:
    a: np.ndarray
    sigma: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if sigma.shape != (a.size, a.size):
            raise ValueError(f"Sigma has shape {sigma.shape}, expected {(a.size, a.size)}")
        if not np.allclose(sigma, sigma.T):
            raise CholeskyFailure("Sigma is not symmetric")
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as exc:
            raise CholeskyFailure("Sigma is not positive definite") from exc
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "chol", chol)

    @property
    def d(self) -> int:
        return self.a.size


def orthant_constraint(t: int, x_prefix, model: OrthantModel) -> np.ndarray:
    """Lower bound ``f_t`` on ``X_t`` (``t`` counted from 1) given ``X_{1:t-1}``.

    ``x_prefix`` is ``(t-1,)`` or a batch ``(n, >= t-1)``; for ``t = 1`` the bound is ``a_1``.
    """
    if not 1 <= t <= model.d:
        raise ValueError(f"t must lie in [1, {model.d}], got {t}")
    x = np.asarray(x_prefix, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)[:, : t - 1]
    g = model.chol[t - 1]
    f = (model.a[t - 1] - x @ g[: t - 1]) / g[t - 1]
    return float(f[0]) if single else f


class OrthantFK(FeynmanKacModel):
    """Growing-dimension model; the state before time 1 is empty."""

    def __init__(self, model: OrthantModel):
        self.model = model

    def sample_initial(self, n, rng):
        return np.empty((n, 0))

    def extend(self, t, x, rng):
        f = orthant_constraint(t, x, self.model)
        return np.column_stack([x, truncated_normal_lower(f, rng)])

    def log_potential(self, t, x):
        if t == 0:
            return np.zeros(len(x))
        return log_normal_cdf_neg(orthant_constraint(t, x, self.model))

    def kernel(self, t, x):
        return OrthantGibbsKernel(self.model.chol[:t, :t], self.model.a[:t])

    def is_terminal(self, t):
        return t >= self.model.d


def orthant_fk(model: OrthantModel) -> OrthantFK:
    return OrthantFK(model)


def ar1_correlation(d: int, rho: float) -> np.ndarray:
    idx = np.arange(d)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def load_matrix_csv(path) -> np.ndarray:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    m = np.array(rows)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{path}: expected a square matrix, got shape {m.shape}")
    return m
