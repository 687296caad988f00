"""Single-run asymptotic variance estimates from the waste-free chain layout.

The ``N = M * P`` particles of a waste-free iteration are treated as ``M``
stationary chains of length ``P``. Autocovariances are pooled over chains
around the grand mean and fed to a single-chain estimator of the asymptotic
variance (Geyer's initial monotone sequence, or a Tukey-Hanning lag window).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AutocovSequence",
    "grand_mean_autocov",
    "geyer_ims",
    "tukey_hanning",
    "tukey_hanning_window",
    "mchain_variance",
    "reweighted_variance",
    "log_norm_const_variance",
    "autocorrelation_time",
    "ESTIMATORS",
]

ESTIMATORS = ("geyer", "tukey_hanning")


@dataclass(frozen=True)
class AutocovSequence:
    gammas: np.ndarray
    M: int
    P: int
    grand_mean: float


def _as_chain_values(chains, phi=None) -> np.ndarray:
    if phi is not None:
        values = chains.values(phi)
    elif hasattr(chains, "chains"):
        values = np.asarray(chains.chains, dtype=float)
    else:
        values = np.asarray(chains, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    if values.ndim != 2:
        raise ValueError(f"expected (M, P) chain values, got shape {values.shape}")
    return values


def grand_mean_autocov(chains, phi=None, max_lag: int | None = None) -> AutocovSequence:
    """Pooled lag-``q`` autocovariances, ``q = 0..max_lag``.

    ``gamma_q = (1/MP) sum_m sum_{p < P-q} (v[m,p] - mu)(v[m,p+q] - mu)`` with
    ``mu`` the grand mean. ``chains`` is a :class:`~wastefree.samplers.ChainArray`
    (with ``phi`` mapping states to reals) or an ``(M, P)`` array of values.
    """
    v = _as_chain_values(chains, phi)
    M, P = v.shape
    max_lag = P - 1 if max_lag is None else int(max_lag)
    if not 0 <= max_lag < P:
        raise ValueError(f"max_lag must lie in [0, {P - 1}], got {max_lag}")
    mu = float(v.mean())
    c = v - mu
    nfft = 1 << int(np.ceil(np.log2(2 * P)))
    f = np.fft.rfft(c, n=nfft, axis=1)
    acf = np.fft.irfft(np.abs(f) ** 2, n=nfft, axis=1)[:, : max_lag + 1].sum(axis=0)
    return AutocovSequence(acf / (M * P), M, P, mu)


def geyer_ims(autocov: AutocovSequence) -> float:
    """Initial monotone sequence estimate of the asymptotic variance."""
    g = np.asarray(autocov.gammas, dtype=float)
    n_pairs = g.size // 2
    pairs = g[: 2 * n_pairs : 2] + g[1 : 2 * n_pairs : 2]
    if g.size == 1:
        return max(float(g[0]), 0.0)
    nonpos = np.flatnonzero(pairs <= 0.0)
    if nonpos.size:
        pairs = pairs[: nonpos[0]]
    pairs = np.minimum.accumulate(pairs)
    return max(float(-g[0] + 2.0 * pairs.sum()), 0.0)


def tukey_hanning_window(x):
    return 0.5 * (1.0 + np.cos(np.pi * np.asarray(x, dtype=float)))


def tukey_hanning(autocov: AutocovSequence, bandwidth: int | None = None) -> float:
    """Lag-window estimate ``gamma_0 + 2 sum_{q=1}^{b} w(q/b) gamma_q``.

    The bandwidth defaults to ``floor(sqrt(P))``. Negative estimates are
    floored at zero with a ``RuntimeWarning``.
    """
    g = np.asarray(autocov.gammas, dtype=float)
    b = int(np.sqrt(autocov.P)) if bandwidth is None else int(bandwidth)
    if b >= g.size:
        raise ValueError(f"bandwidth {b} needs {b + 1} autocovariances, got {g.size}")
    if b < 1:
        return max(float(g[0]), 0.0)
    q = np.arange(1, b + 1)
    v = float(g[0] + 2.0 * np.sum(tukey_hanning_window(q / b) * g[1 : b + 1]))
    if v < 0.0:
        warnings.warn("negative Tukey-Hanning variance estimate floored at 0", RuntimeWarning, stacklevel=2)
        return 0.0
    return v


def mchain_variance(chains, phi=None, estimator: str = "geyer", bandwidth: int | None = None) -> float:
    """M-chain estimate of the asymptotic variance of ``phi`` under the iteration's kernel."""
    v = _as_chain_values(chains, phi)
    P = v.shape[1]
    if P < 2:
        raise ValueError("the M-chain estimator needs chains of length >= 2")
    if estimator == "geyer":
        return geyer_ims(grand_mean_autocov(v))
    if estimator == "tukey_hanning":
        b = int(np.sqrt(P)) if bandwidth is None else int(bandwidth)
        return tukey_hanning(grand_mean_autocov(v, max_lag=min(b, P - 1)), b)
    raise ValueError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")


def autocorrelation_time(chains, phi=None, estimator: str = "geyer") -> float:
    """``v_inf / (2 Var)``; 0.5 for white noise, and for constant chains."""
    v = _as_chain_values(chains, phi)
    gamma0 = grand_mean_autocov(v, max_lag=0).gammas[0]
    if gamma0 <= 0.0:
        return 0.5
    return max(mchain_variance(v, estimator=estimator) / (2.0 * gamma0), 0.5)


def reweighted_variance(chains, weights, phi=None, estimator: str = "geyer") -> float:
    """Estimate of the asymptotic variance of the weighted estimate of ``phi``.

    Applies the M-chain estimator to ``(G / l^N) (phi - Q^N(phi))``; with
    normalised weights ``W`` over the flattened chains, ``G / l^N = N W``.
    """
    v = _as_chain_values(chains, phi)
    w = np.asarray(weights, dtype=float).reshape(v.shape)
    q = float(np.sum(w * v))
    return mchain_variance(v.size * w * (v - q), estimator=estimator)


def log_norm_const_variance(per_iteration_estimates) -> float:
    """Sum of the per-iteration terms; divide by ``N`` for Var(log L^N)."""
    total = 0.0
    for term in per_iteration_estimates:
        total += float(term)
    return total
