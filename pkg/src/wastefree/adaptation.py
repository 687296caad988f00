"""Adaptive tempering exponents and the chain-length target of adaptive waste-free SMC."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from wastefree.core import FeynmanKacModel, logsumexp

__all__ = [
    "TemperSchedule",
    "ess_of_increment",
    "next_exponent",
    "adaptive_p_target",
    "TemperedModel",
]

BISECTION_STEPS = 80


@dataclass(frozen=True)
class TemperSchedule:
    exponents: tuple[float, ...]
    alpha: float
    final: float = 1.0

    def __post_init__(self):
        e = np.asarray(self.exponents, dtype=float)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if e.size == 0 or e[0] != 0.0:
            raise ValueError("a schedule starts at exponent 0")
        if np.any(np.diff(e) <= 0):
            raise ValueError("exponents must be strictly increasing")

    @property
    def complete(self) -> bool:
        return self.exponents[-1] == self.final


def ess_of_increment(log_liks, delta: float) -> float:
    """ESS of the incremental weights ``exp(delta * log_liks)``, in the log domain."""
    ll = np.asarray(log_liks, dtype=float)
    lw = np.where(np.isneginf(ll), -np.inf, delta * ll)
    return float(np.exp(2.0 * logsumexp(lw) - logsumexp(2.0 * lw)))


def next_exponent(log_liks, gamma_prev: float, alpha: float, n_eff_base: int, gamma_max: float = 1.0) -> float:
    """Next tempering exponent such that the ESS of the increment is ``alpha * n_eff_base``.

    Returns ``gamma_max`` whenever the full jump keeps the ESS above target.
    The ESS is non-increasing in the increment, so the root is bracketed and
    found by bisection.
    """
    if gamma_prev >= gamma_max:
        raise ValueError(f"gamma_prev={gamma_prev} already reached gamma_max={gamma_max}")
    target = alpha * n_eff_base
    span = gamma_max - gamma_prev
    if ess_of_increment(log_liks, span) >= target:
        return float(gamma_max)
    lo, hi = 0.0, span
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if ess_of_increment(log_liks, mid) >= target:
            lo = mid
        else:
            hi = mid
    delta = lo if lo > 0.0 else hi
    return float(gamma_prev + delta)


def adaptive_p_target(act_estimate: float, kappa: float, current_P: int) -> int:
    """Smallest ``current_P * 2**j`` (``j >= 0``) that is at least ``kappa * act_estimate``."""
    if kappa < 1.0:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    act = max(float(act_estimate), 0.5)
    P = int(current_P)
    while P < kappa * act:
        P *= 2
    return P


class TemperedModel(FeynmanKacModel):
    """Tempering bridge ``pi_t ∝ prior * L**gamma_t`` with ESS-driven exponents.

    ``kernel_builder(log_target, gamma, x)`` returns a kernel invariant for the
    density ``exp(log_target)`` (the bridge at exponent ``gamma``), calibrated
    on the resampled particles ``x``.
    """

    def __init__(
        self,
        sample_prior: Callable[[int, np.random.Generator], np.ndarray],
        log_prior: Callable[[np.ndarray], np.ndarray],
        log_likelihood: Callable[[np.ndarray], np.ndarray],
        kernel_builder: Callable,
        alpha: float = 0.5,
        gamma_max: float = 1.0,
    ):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        self.sample_prior = sample_prior
        self.log_prior = log_prior
        self.log_likelihood = log_likelihood
        self.kernel_builder = kernel_builder
        self.alpha = alpha
        self.gamma_max = float(gamma_max)
        self.exponents: list[float] = []

    @property
    def schedule(self) -> TemperSchedule:
        return TemperSchedule(tuple(self.exponents), self.alpha, self.gamma_max)

    def sample_initial(self, n, rng):
        return self.sample_prior(n, rng)

    def log_potential(self, t, x):
        if t == 0:
            self.exponents = [0.0]
            return np.zeros(len(x))
        ll = np.asarray(self.log_likelihood(x), dtype=float)
        prev = self.exponents[t - 1]
        gamma = next_exponent(ll, prev, self.alpha, len(x), self.gamma_max)
        del self.exponents[t:]
        self.exponents.append(gamma)
        return np.where(np.isneginf(ll), -np.inf, (gamma - prev) * ll)

    def tempered_log_density(self, gamma: float):
        def log_target(y):
            lp = np.asarray(self.log_prior(y), dtype=float)
            if gamma == 0.0:
                return lp
            return lp + gamma * np.asarray(self.log_likelihood(y), dtype=float)

        return log_target

    def kernel(self, t, x):
        return self.kernel_builder(self.tempered_log_density(self.exponents[t - 1]), self.exponents[t - 1], x)

    def is_terminal(self, t):
        return self.exponents[t] >= self.gamma_max

    def exponent(self, t):
        return self.exponents[t]

    def act_statistic(self, t, x):
        # log G_t is a multiple of the log-likelihood and the ACT is scale free
        return np.asarray(self.log_likelihood(x), dtype=float)
