"""Particle populations, log-weight arithmetic and the Feynman-Kac model contract.

States are numpy arrays whose leading axis indexes particles; a population of
``N`` scalar states has shape ``(N,)``, ``N`` vectors in ``R^d`` shape ``(N, d)``
and so on. All weights are handled in the log domain so that indicator
potentials (log-weight ``-inf``) are representable.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AllWeightsZero",
    "TerminationFailure",
    "WeightedSample",
    "NormConstAccumulator",
    "FeynmanKacModel",
    "logsumexp",
    "normalize_log_weights",
    "ess",
    "accumulate_norm_const",
]


class AllWeightsZero(RuntimeError):
    """Every particle has zero weight: the population went extinct."""


class TerminationFailure(RuntimeError):
    """The model never signalled termination within the iteration cap."""


def logsumexp(log_values) -> float:
    lw = np.asarray(log_values, dtype=float)
    if lw.size == 0:
        raise AllWeightsZero("empty log-weight vector")
    top = lw.max()
    if top == -np.inf:
        raise AllWeightsZero("all log-weights are -inf")
    if np.isnan(top) or top == np.inf:
        raise ValueError(f"invalid log-weight {top}")
    return float(top + np.log(np.sum(np.exp(lw - top))))


def normalize_log_weights(log_weights) -> tuple[np.ndarray, float]:
    """Normalise log-weights.

    Returns the normalised weights ``W`` and ``log_mean``, the log of the
    average unnormalised weight, i.e. ``logsumexp(log_weights) - log(N)``.
    """
    lw = np.asarray(log_weights, dtype=float)
    lse = logsumexp(lw)
    weights = np.exp(lw - lse)
    return weights, lse - np.log(lw.size)


def ess(weights) -> float:
    """Effective sample size ``1 / sum(W**2)`` of normalised weights."""
    w = np.asarray(weights, dtype=float)
    return float(1.0 / np.dot(w, w))


@dataclass(frozen=True)
class WeightedSample:
    """``N`` particle states with their log-weights."""

    states: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        lw = np.asarray(self.log_weights, dtype=float)
        if lw.ndim != 1 or lw.size < 1:
            raise ValueError("log_weights must be a non-empty 1-d array")
        if len(self.states) != lw.size:
            raise ValueError(f"{len(self.states)} states but {lw.size} log-weights")
        if not np.any(np.isfinite(lw)):
            raise AllWeightsZero("population has no particle with positive weight")
        object.__setattr__(self, "log_weights", lw)

    @property
    def N(self) -> int:
        return self.log_weights.size

    @property
    def weights(self) -> np.ndarray:
        return normalize_log_weights(self.log_weights)[0]

    @property
    def log_mean_weight(self) -> float:
        return normalize_log_weights(self.log_weights)[1]

    @property
    def ess(self) -> float:
        return ess(self.weights)

    @classmethod
    def uniform(cls, states) -> "WeightedSample":
        return cls(states, np.zeros(len(states)))


@dataclass(frozen=True)
class NormConstAccumulator:
    """Running log normalising-constant estimate, log L_t = sum of log l_s."""

    log_L: float = 0.0
    per_step_log_ell: tuple[float, ...] = field(default_factory=tuple)


def accumulate_norm_const(acc: NormConstAccumulator, log_mean: float) -> NormConstAccumulator:
    if not np.isfinite(log_mean):
        raise ValueError(f"log_mean must be finite, got {log_mean}")
    return NormConstAccumulator(acc.log_L + float(log_mean), acc.per_step_log_ell + (float(log_mean),))


class FeynmanKacModel(ABC):
    """Initial distribution, potentials, invariant kernels and stopping rule.

    A model instance may hold adaptive state for a single run (for instance the
    tempering exponents chosen so far); build a fresh instance per run.

    Subclasses implement:

    * ``sample_initial(n, rng)``: ``n`` IID draws from the initial distribution.
    * ``log_potential(t, x)``: ``log G_t`` evaluated on every particle of ``x``.
      Adaptive models may fix their time-``t`` parameters here, from ``x``.
    * ``kernel(t, x)``: a :class:`~wastefree.kernels.MarkovKernel` leaving
      ``pi_{t-1}`` invariant, calibrated on the resampled particles ``x``.
      Models with growing state (``extend``) return instead a ``pi_t``-invariant
      rejuvenation kernel.
    * ``is_terminal(t)``: whether iteration ``t`` is the last one.
    """

    @abstractmethod
    def sample_initial(self, n: int, rng: np.random.Generator) -> np.ndarray: ...

    @abstractmethod
    def log_potential(self, t: int, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def kernel(self, t: int, x: np.ndarray): ...

    @abstractmethod
    def is_terminal(self, t: int) -> bool: ...

    def extend(self, t: int, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has a fixed state space")

    def exponent(self, t: int) -> float:
        """Tempering exponent (or level index) reached at iteration ``t``."""
        return float(t)

    def act_statistic(self, t: int, x: np.ndarray) -> np.ndarray:
        """Scalar summary used to gauge kernel mixing; defaults to ``log G_t``."""
        return self.log_potential(t, x)
