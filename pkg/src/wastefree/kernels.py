"""Invariant Markov kernels used to move particles.

Kernels are vectorised: ``step(x, rng)`` moves every row of ``x`` once and
returns the new states together with a per-row acceptance flag. ``chain``
runs ``length - 1`` steps from each row and returns the whole trajectory, with
shape ``(n, length) + state_shape``; kernels override it when a faster
equivalent exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from wastefree.core import WeightedSample
from wastefree.distributions import truncated_normal

__all__ = [
    "MarkovKernel",
    "IdentityKernel",
    "KFoldKernel",
    "kfold_wrap",
    "GaussianProposalCalibration",
    "SingularCovariance",
    "InfeasibleState",
    "calibrate_rwm",
    "rwm_step",
    "RWMKernel",
    "MixtureKernel",
    "mixture_kernel_step",
    "latin_swap_delta",
    "latin_swap_step",
    "LatinSwapKernel",
    "gibbs_truncated_sweep",
    "OrthantGibbsKernel",
]

JITTER = 1e-10


class SingularCovariance(np.linalg.LinAlgError):
    pass


class InfeasibleState(ValueError):
    """A state handed to the Gibbs sampler violates one of its constraints."""


class MarkovKernel:
    def __init__(self):
        self.n_proposed = 0
        self.n_accepted = 0

    def step(self, x: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def chain(self, x0: np.ndarray, length: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty((len(x0), length) + x0.shape[1:], dtype=x0.dtype)
        out[:, 0] = x0
        for p in range(1, length):
            out[:, p], _ = self.step(out[:, p - 1], rng)
        return out

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_proposed if self.n_proposed else float("nan")

    def _record(self, accepted: np.ndarray) -> None:
        self.n_proposed += accepted.size
        self.n_accepted += int(np.count_nonzero(accepted))


class IdentityKernel(MarkovKernel):
    def step(self, x, rng):
        accepted = np.zeros(len(x), dtype=bool)
        self._record(accepted)
        return x.copy(), accepted


class KFoldKernel(MarkovKernel):
    """``k`` successive applications of ``inner``; diagnostics live on ``inner``."""

    def __init__(self, inner: MarkovKernel, k: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.inner = inner
        self.k = k

    @property
    def n_proposed(self):
        return self.inner.n_proposed

    @property
    def n_accepted(self):
        return self.inner.n_accepted

    def step(self, x, rng):
        n_acc = np.zeros(len(x), dtype=int)
        for _ in range(self.k):
            x, acc = self.inner.step(x, rng)
            n_acc += acc
        return x, n_acc


def kfold_wrap(kernel: MarkovKernel, k: int) -> MarkovKernel:
    return KFoldKernel(kernel, k)


# -- random walk Metropolis ---------------------------------------------------


@dataclass(frozen=True)
class GaussianProposalCalibration:
    covariance: np.ndarray
    scale: float
    cholesky_factor: np.ndarray

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]


def calibrate_rwm(population, scale_override: float | None = None) -> GaussianProposalCalibration:
    """Random-walk proposal from the weighted empirical covariance of a population.

    ``population`` is a :class:`WeightedSample` of ``(N, d)`` states, or a bare
    ``(N, d)`` array taken with equal weights. The default scale is ``2.38**2/d``.
    A jitter of ``1e-10 I`` is always added to the covariance.
    """
    if not isinstance(population, WeightedSample):
        population = WeightedSample.uniform(np.asarray(population, dtype=float))
    x = np.asarray(population.states, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    d = x.shape[1]
    w = population.weights
    mean = w @ x
    centred = x - mean
    cov = (centred * w[:, None]).T @ centred
    cov = 0.5 * (cov + cov.T) + JITTER * np.eye(d)
    scale = 2.38**2 / d if scale_override is None else float(scale_override)
    try:
        chol = np.linalg.cholesky(scale * cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance("proposal covariance is not positive definite") from exc
    if not np.all(np.isfinite(chol)):
        raise SingularCovariance("non-finite proposal covariance")
    return GaussianProposalCalibration(cov, scale, chol)


def _rwm_move(x, lt, calibration, log_target, rng):
    z = rng.standard_normal(x.shape)
    prop = x + z @ calibration.cholesky_factor.T
    lt_prop = np.asarray(log_target(prop), dtype=float)
    log_u = np.log(rng.random(len(x)))
    accepted = log_u < lt_prop - lt
    x_new = np.where(accepted[:, None], prop, x)
    return x_new, np.where(accepted, lt_prop, lt), accepted


def rwm_step(x, calibration: GaussianProposalCalibration, log_target: Callable, rng):
    """One Metropolis step with Gaussian random-walk proposal, for each row of ``x``.

    ``log_target`` maps an ``(n, d)`` array to ``n`` log-densities; proposals
    with log-density ``-inf`` are always rejected.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lt = np.asarray(log_target(x), dtype=float)
    x_new, _, accepted = _rwm_move(x, lt, calibration, log_target, rng)
    return x_new, accepted


class RWMKernel(MarkovKernel):
    def __init__(self, log_target: Callable, calibration: GaussianProposalCalibration):
        super().__init__()
        self.log_target = log_target
        self.calibration = calibration

    def step(self, x, rng):
        x_new, accepted = rwm_step(x, self.calibration, self.log_target, rng)
        self._record(accepted)
        return x_new, accepted

    def chain(self, x0, length, rng):
        # same draws, in the same order, as repeated calls to ``step``; the
        # target is only evaluated once per proposal
        out = np.empty((len(x0), length) + x0.shape[1:])
        out[:, 0] = x0
        lt = np.asarray(self.log_target(x0), dtype=float)
        for p in range(1, length):
            out[:, p], lt, accepted = _rwm_move(out[:, p - 1], lt, self.calibration, self.log_target, rng)
            self._record(accepted)
        return out


# -- mixture kernel of the nested-uniform testbed -----------------------------


class MixtureKernel(MarkovKernel):
    """With probability ``p`` redraw the state from Uniform(0, bound), else stay."""

    def __init__(self, p: float, bound: float):
        super().__init__()
        if not 0.0 < p <= 1.0:
            raise ValueError(f"move probability must lie in (0, 1], got {p}")
        self.p = p
        self.bound = bound

    def step(self, x, rng):
        moved = rng.random(len(x)) < self.p
        fresh = self.bound * rng.random(len(x))
        self._record(moved)
        return np.where(moved, fresh, x), moved

    def chain(self, x0, length, rng):
        n = len(x0)
        moved = rng.random((n, length - 1)) < self.p
        fresh = self.bound * rng.random((n, length - 1))
        self._record(moved)
        values = np.concatenate([np.asarray(x0, dtype=float)[:, None], fresh], axis=1)
        last = np.zeros((n, length), dtype=np.intp)
        last[:, 1:] = np.where(moved, np.arange(1, length), 0)
        np.maximum.accumulate(last, axis=1, out=last)
        return np.take_along_axis(values, last, axis=1)


def mixture_kernel_step(state, move_prob: float, level_set_bound: float, rng):
    x = np.atleast_1d(np.asarray(state, dtype=float))
    x_new, _ = MixtureKernel(move_prob, level_set_bound).step(x, rng)
    return x_new if np.ndim(state) else float(x_new[0])


# -- Latin squares ------------------------------------------------------------


def latin_swap_delta(x: np.ndarray, i, j, jp) -> np.ndarray:
    """Change in the Latin score when entries ``(i, j)`` and ``(i, jp)`` are swapped.

    ``x`` has shape ``(n, d, d)``; ``i, j, jp`` are length-``n`` index arrays.
    """
    rows = np.arange(len(x))
    a = x[rows, i, j]
    b = x[rows, i, jp]
    col_j = x[rows, :, j]
    col_jp = x[rows, :, jp]
    c_ja = np.count_nonzero(col_j == a[:, None], axis=1)
    c_jb = np.count_nonzero(col_j == b[:, None], axis=1)
    c_jpa = np.count_nonzero(col_jp == a[:, None], axis=1)
    c_jpb = np.count_nonzero(col_jp == b[:, None], axis=1)
    delta = 2 * (c_jb - c_ja + 1) + 2 * (c_jpa - c_jpb + 1)
    return np.where(j == jp, 0, delta)


def latin_swap_step(square, inv_temperature: float, rng):
    """Metropolis step for the target ``exp(-lambda V)`` on permutation squares.

    Proposes swapping two distinct entries of a uniformly chosen row. Accepts a
    single ``(d, d)`` square or a batch ``(n, d, d)``.
    """
    x = np.asarray(square)
    single = x.ndim == 2
    x_new, accepted = LatinSwapKernel(inv_temperature).step(x[None] if single else x, rng)
    return (x_new[0], bool(accepted[0])) if single else (x_new, accepted)


class LatinSwapKernel(MarkovKernel):
    def __init__(self, inv_temperature: float):
        super().__init__()
        self.lam = float(inv_temperature)

    def step(self, x, rng):
        n, d, _ = x.shape
        i = rng.integers(d, size=n)
        j = rng.integers(d, size=n)
        jp = (j + 1 + rng.integers(d - 1, size=n)) % d
        delta = latin_swap_delta(x, i, j, jp)
        log_u = np.log(rng.random(n))
        accepted = log_u < -self.lam * delta
        self._record(accepted)
        x_new = x.copy()
        rows = np.flatnonzero(accepted)
        ii, jj, kk = i[rows], j[rows], jp[rows]
        x_new[rows, ii, jj], x_new[rows, ii, kk] = x[rows, ii, kk], x[rows, ii, jj]
        return x_new, accepted


# -- Gibbs sampler for Gaussian orthant targets -------------------------------


def gibbs_truncated_sweep(x, chol: np.ndarray, a: np.ndarray, rng, tol: float = 1e-9):
    """One systematic-scan Gibbs sweep for N(0, I_t) restricted to ``chol_t x >= a_t``.

    ``x`` has shape ``(n, t)``; only the leading ``t x t`` block of the lower
    Cholesky factor ``chol`` and the first ``t`` thresholds are used. The
    constraint on ``x_u`` (the ``u``-th row of ``chol x >= a``) is linear in
    every ``x_s`` with ``s <= u``, so coordinate ``s`` is redrawn from N(0, 1)
    truncated to the interval that keeps all rows ``u >= s`` satisfied; rows
    with a negative coefficient on ``x_s`` give upper bounds.
    """
    x = np.array(x, dtype=float, copy=True)
    if x.ndim == 1:
        x = x[:, None]
    n, t = x.shape
    g = np.asarray(chol, dtype=float)[:t, :t]
    resid = x @ g.T - np.asarray(a, dtype=float)[:t]
    if np.any(resid < -tol * (1.0 + np.abs(np.asarray(a[:t], dtype=float)))):
        raise InfeasibleState("state violates the orthant constraints")
    resid = np.maximum(resid, 0.0)
    for s in range(t):
        col = g[s:, s]
        r = resid[:, s:]
        with np.errstate(divide="ignore", invalid="ignore"):
            slack = r / np.abs(col)
        pos = col > 0
        neg = col < 0
        xs = x[:, s]
        lo = xs - slack[:, pos].min(axis=1)
        hi = xs + (slack[:, neg].min(axis=1) if neg.any() else np.inf)
        hi = np.maximum(hi, lo)
        x_new = truncated_normal(lo, hi, rng)
        resid[:, s:] += (x_new - xs)[:, None] * col[None, :]
        np.maximum(resid, 0.0, out=resid)
        x[:, s] = x_new
    return x


class OrthantGibbsKernel(MarkovKernel):
    def __init__(self, chol: np.ndarray, a: np.ndarray):
        super().__init__()
        self.chol = np.asarray(chol, dtype=float)
        self.a = np.asarray(a, dtype=float)

    def step(self, x, rng):
        accepted = np.ones(len(x), dtype=bool)
        self._record(accepted)
        return gibbs_truncated_sweep(x, self.chol, self.a, rng), accepted
