"""Nested uniform level sets: an exactly solvable testbed.

The initial distribution is Uniform(0, 1), ``G_t`` is the indicator of
``A_t = [0, r**t]`` and the kernel at time ``t`` redraws the state from
``pi_{t-1} = Uniform(0, r**(t-1))`` with probability ``p``. Normalising
constants and asymptotic variances are then available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wastefree.core import FeynmanKacModel
from wastefree.kernels import MixtureKernel

__all__ = [
    "NestedUniformModel",
    "NestedUniformFK",
    "nested_uniform_fk",
    "inflation_wf",
    "inflation_std",
    "inflation_std_limit",
    "critical_k",
]


@dataclass(frozen=True)
class NestedUniformModel:
    r: float
    p: float
    T: int

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError(f"r must lie in (0, 1), got {self.r}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")

    def level(self, t: int) -> float:
        return self.r**t

    def log_norm_const(self, t: int) -> float:
        return t * math.log(self.r)

    def target_mean(self, t: int) -> float:
        return self.r**t / 2.0

    def target_variance(self, t: int) -> float:
        return self.r ** (2 * t) / 12.0

    def log_ell_asymptotic_variance(self, t: int) -> float:
        """``v_inf(K_t, G_t / l_t)``: variance of the normalised indicator times ``2/p - 1``."""
        if t == 0:
            return 0.0
        return (1.0 - self.r) / self.r * (2.0 / self.p - 1.0)


class NestedUniformFK(FeynmanKacModel):
    def __init__(self, model: NestedUniformModel):
        self.model = model

    def sample_initial(self, n, rng):
        return rng.random(n)

    def log_potential(self, t, x):
        return np.where(np.asarray(x) <= self.model.level(t), 0.0, -np.inf)

    def kernel(self, t, x):
        return MixtureKernel(self.model.p, self.model.level(t - 1))

    def is_terminal(self, t):
        return t >= self.model.T

    def act_statistic(self, t, x):
        return (np.asarray(x) <= self.model.level(t)).astype(float)


def nested_uniform_fk(model: NestedUniformModel) -> NestedUniformFK:
    return NestedUniformFK(model)


def inflation_wf(r: float, p: float) -> float:
    """Asymptotic variance of waste-free estimates over ``Var_{pi_t}(phi)``: ``(2/p - 1)/r``."""
    return (2.0 / p - 1.0) / r


def inflation_std(t: int, k: int, r: float, p: float) -> float:
    """Same ratio for standard SMC with ``k``-fold kernels at time ``t``."""
    q = (1.0 - p) ** (2 * k) / r
    return sum(q**s for s in range(t + 1)) / r


def inflation_std_limit(k: int, r: float, p: float) -> float:
    """``t -> inf`` limit of :func:`inflation_std`; infinite when ``k`` is below :func:`critical_k`."""
    q = (1.0 - p) ** (2 * k) / r
    return math.inf if q >= 1.0 else 1.0 / (r * (1.0 - q))


def critical_k(r: float, p: float) -> float:
    """Smallest number of kernel steps keeping standard SMC stable, ``log r / (2 log(1-p))``."""
    return math.log(r) / (2.0 * math.log(1.0 - p))
