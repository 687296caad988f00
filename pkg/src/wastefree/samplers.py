"""Standard and waste-free SMC samplers.

All drivers share the same bookkeeping: iteration ``t`` draws its randomness
from ``rng_stream(seed, t)``, reweights the current population by ``G_t``,
accumulates ``log l_t`` into the normalising-constant estimate, evaluates the
estimands and appends an :class:`IterationRecord` to the :class:`RunTrace`.

Waste-free iterations additionally estimate, from the single run, the
asymptotic variance of each estimate (M-chain estimator, see
:mod:`wastefree.variance`).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from wastefree.adaptation import adaptive_p_target
from wastefree.core import (
    FeynmanKacModel,
    NormConstAccumulator,
    TerminationFailure,
    accumulate_norm_const,
    ess,
    normalize_log_weights,
)
from wastefree.distributions import rng_stream
from wastefree.kernels import kfold_wrap
from wastefree.resampling import multinomial_resample
from wastefree.variance import ESTIMATORS, autocorrelation_time, mchain_variance

__all__ = [
    "ChainArray",
    "IterationRecord",
    "RunTrace",
    "MaxPExceeded",
    "run_standard_smc",
    "run_waste_free_smc",
    "run_waste_free_growing",
    "run_waste_free_adaptive_p",
]

MAX_ITERATIONS = 10_000


class MaxPExceeded(UserWarning):
    """The adaptive chain length hit its cap before meeting the ACT requirement."""


@dataclass(frozen=True)
class ChainArray:
    """``M`` chains of length ``P``; ``chains[m, p]`` is the ``p``-th state of chain ``m``.

    The flattened population (length ``N = M * P``) is the row-major view, so
    particle ``m * P + p`` is state ``p`` of chain ``m``.
    """

    chains: np.ndarray

    @property
    def M(self) -> int:
        return self.chains.shape[0]

    @property
    def P(self) -> int:
        return self.chains.shape[1]

    @property
    def N(self) -> int:
        return self.M * self.P

    @property
    def flat(self) -> np.ndarray:
        return self.chains.reshape((self.N,) + self.chains.shape[2:])

    def values(self, phi: Callable) -> np.ndarray:
        return np.asarray(phi(self.flat), dtype=float).reshape(self.M, self.P)

    @classmethod
    def from_flat(cls, x: np.ndarray, M: int) -> "ChainArray":
        if len(x) % M:
            raise ValueError(f"{len(x)} particles do not split into {M} chains")
        return cls(x.reshape((M, len(x) // M) + x.shape[1:]))


@dataclass
class IterationRecord:
    t: int
    exponent: float
    ess: float
    log_ell: float
    log_L: float
    N: int
    P: int | None
    acc_rate: float
    kernel_steps: int
    estimates: dict[str, float] = field(default_factory=dict)
    variances: dict[str, float] = field(default_factory=dict)
    var_log_ell: float | None = None
    var_logL_partial: float | None = None
    rejuvenated: bool = False


@dataclass
class RunTrace:
    iterations: list[IterationRecord] = field(default_factory=list)
    log_L: float = 0.0
    estimates: dict[str, float] = field(default_factory=dict)
    variances: dict[str, float] = field(default_factory=dict)
    var_log_L: float | None = None
    kernel_steps: int = 0
    potential_evals: int = 0
    wall_ms: float = 0.0
    warnings: list[str] = field(default_factory=list)
    chains: ChainArray | None = None
    weights: np.ndarray | None = None

    @property
    def T(self) -> int:
        return self.iterations[-1].t

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(rec, name) for rec in self.iterations], dtype=float)


def _named(estimands) -> dict[str, Callable]:
    if estimands is None:
        return {}
    if isinstance(estimands, Mapping):
        return dict(estimands)
    if callable(estimands):
        estimands = [estimands]
    out = {}
    for i, f in enumerate(estimands):
        name = getattr(f, "__name__", f"phi{i}")
        out[name if name not in out and name != "<lambda>" else f"phi{i}"] = f
    return out


class _Run:
    """Bookkeeping shared by the drivers."""

    def __init__(self, model: FeynmanKacModel, estimands, estimator: str | None):
        if estimator is not None and estimator not in ESTIMATORS:
            raise ValueError(f"unknown variance estimator {estimator!r}")
        self.model = model
        self.estimands = _named(estimands)
        self.estimator = estimator
        self.acc = NormConstAccumulator()
        self.trace = RunTrace()
        self.closed_var = 0.0
        self.start = time.perf_counter()

    def log_potential(self, t, x):
        self.trace.potential_evals += len(x)
        return np.asarray(self.model.log_potential(t, x), dtype=float)

    def record(self, t, x, log_w_prev, log_g, *, P, kernel, kernel_steps, layout_M=None):
        """Reweight, accumulate, estimate and append a record.

        ``log_w_prev`` are the log-weights carried into this iteration (``None``
        when they are uniform). ``layout_M`` is the number of chains the
        current population splits into (``None`` for an IID population).
        Populations are rebuilt with uniform weights, so the current log-weights
        also accumulate the potentials since the last rebuild.
        """
        if log_w_prev is None:
            log_w = log_g
            W, log_ell = normalize_log_weights(log_w)
        else:
            log_w = log_w_prev + log_g
            W, log_mw = normalize_log_weights(log_w)
            log_ell = log_mw - normalize_log_weights(log_w_prev)[1]
        self.acc = accumulate_norm_const(self.acc, log_ell)
        rec = IterationRecord(
            t=t,
            exponent=self.model.exponent(t),
            ess=ess(W),
            log_ell=log_ell,
            log_L=self.acc.log_L,
            N=len(W),
            P=P,
            acc_rate=kernel.acceptance_rate if kernel is not None else float("nan"),
            kernel_steps=kernel_steps,
        )
        values = {name: np.asarray(phi(x), dtype=float) for name, phi in self.estimands.items()}
        for name, v in values.items():
            rec.estimates[name] = float(W @ v)

        if self.estimator is not None:
            n = len(W)
            open_term = _variance(n * W, layout_M, self.estimator)
            rec.var_log_ell = open_term
            rec.var_logL_partial = self.closed_var + open_term / n
            for name, v in values.items():
                f = n * W * (v - rec.estimates[name])
                rec.variances[name] = _variance(f, layout_M, self.estimator) / n
        self.trace.iterations.append(rec)
        self.trace.kernel_steps += kernel_steps
        return log_w, W, rec

    def close_segment(self, rec: IterationRecord) -> None:
        if rec.var_log_ell is not None:
            self.closed_var += rec.var_log_ell / rec.N

    def finish(self, chains=None, weights=None) -> RunTrace:
        tr = self.trace
        last = tr.iterations[-1]
        tr.log_L = self.acc.log_L
        tr.estimates = dict(last.estimates)
        tr.variances = dict(last.variances)
        tr.var_log_L = last.var_logL_partial
        tr.chains = chains
        tr.weights = weights
        tr.wall_ms = 1e3 * (time.perf_counter() - self.start)
        return tr


def _variance(values: np.ndarray, layout_M: int | None, estimator: str) -> float:
    if layout_M is None or layout_M == len(values):
        return float(np.var(values))
    return mchain_variance(values.reshape(layout_M, -1), estimator=estimator)


def _check_cap(t, max_iter):
    if t >= max_iter:
        raise TerminationFailure(f"model did not terminate within {max_iter} iterations")


def run_standard_smc(
    model: FeynmanKacModel,
    N: int,
    k: int,
    seed: int,
    estimands=None,
    max_iter: int = MAX_ITERATIONS,
) -> RunTrace:
    """Generic SMC sampler: resample ``N`` ancestors and move each through ``k`` kernel steps."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    run = _Run(model, estimands, None)
    t = 0
    x = model.sample_initial(N, rng_stream(seed, 0))
    _, W, _ = run.record(0, x, None, run.log_potential(0, x), P=None, kernel=None, kernel_steps=0)
    while not model.is_terminal(t):
        t += 1
        _check_cap(t, max_iter)
        rng = rng_stream(seed, t)
        ancestors = multinomial_resample(W, N, rng)
        x = x[ancestors]
        kernel = kfold_wrap(model.kernel(t, x), k)
        x, _ = kernel.step(x, rng)
        _, W, _ = run.record(t, x, None, run.log_potential(t, x), P=None, kernel=kernel, kernel_steps=N * k)
    return run.finish(weights=W)


def run_waste_free_smc(
    model: FeynmanKacModel,
    M: int,
    P: int,
    seed: int,
    estimands=None,
    variance_estimator: str | None = "geyer",
    max_iter: int = MAX_ITERATIONS,
) -> RunTrace:
    """Waste-free SMC: resample ``M`` of the ``N = M P`` particles, run ``M`` chains of length ``P``.

    Each resampled ancestor is the first state of its chain and is re-scored
    under the new potential like every other chain state.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if P < 2:
        raise ValueError(f"P must be >= 2, got {P}")
    N = M * P
    run = _Run(model, estimands, variance_estimator)
    t = 0
    x = model.sample_initial(N, rng_stream(seed, 0))
    _, W, _ = run.record(0, x, None, run.log_potential(0, x), P=P, kernel=None, kernel_steps=0)
    run.close_segment(run.trace.iterations[-1])
    chains = None
    while not model.is_terminal(t):
        t += 1
        _check_cap(t, max_iter)
        rng = rng_stream(seed, t)
        starts = x[multinomial_resample(W, M, rng)]
        kernel = model.kernel(t, starts)
        chains = ChainArray(kernel.chain(starts, P, rng))
        x = chains.flat
        _, W, rec = run.record(
            t, x, None, run.log_potential(t, x), P=P, kernel=kernel, kernel_steps=M * (P - 1), layout_M=M
        )
        run.close_segment(rec)
    return run.finish(chains=chains, weights=W)


def run_waste_free_adaptive_p(
    model: FeynmanKacModel,
    M: int,
    kappa: float,
    initial_P: int,
    max_P: int,
    seed: int,
    estimands=None,
    variance_estimator: str | None = "geyer",
    act_estimator: str = "geyer",
    max_iter: int = MAX_ITERATIONS,
) -> RunTrace:
    """Waste-free SMC whose chain length is doubled until it exceeds ``kappa`` ACTs.

    The ACT is estimated from the ``M`` chains on ``model.act_statistic``; the
    chain length carries over from one iteration to the next and never
    shrinks. Hitting ``max_P`` is recorded as a warning on the trace.
    """
    if kappa < 1.0:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    if kappa < 2.0:
        warnings.warn("kappa below 2 cannot resolve the autocorrelation time", stacklevel=2)
    if initial_P < 2:
        raise ValueError(f"initial_P must be >= 2, got {initial_P}")
    if max_P < initial_P:
        raise ValueError("max_P must be >= initial_P")
    run = _Run(model, estimands, variance_estimator)
    P = int(initial_P)
    t = 0
    x = model.sample_initial(M * P, rng_stream(seed, 0))
    _, W, _ = run.record(0, x, None, run.log_potential(0, x), P=P, kernel=None, kernel_steps=0)
    run.close_segment(run.trace.iterations[-1])
    chains = None
    while not model.is_terminal(t):
        t += 1
        _check_cap(t, max_iter)
        rng = rng_stream(seed, t)
        starts = x[multinomial_resample(W, M, rng)]
        kernel = model.kernel(t, starts)
        traj = kernel.chain(starts, P, rng)
        while True:
            stat = ChainArray(traj).values(lambda y: model.act_statistic(t, y))
            act = autocorrelation_time(stat, estimator=act_estimator)
            wanted = adaptive_p_target(act, kappa, P)
            if wanted <= P:
                break
            if P >= max_P:
                msg = f"t={t}: P={P} reached max_P but kappa*ACT={kappa * act:.1f}"
                run.trace.warnings.append(msg)
                warnings.warn(msg, MaxPExceeded, stacklevel=2)
                break
            extra = min(2 * P, max_P) - P
            tail = kernel.chain(traj[:, -1], extra + 1, rng)[:, 1:]
            traj = np.concatenate([traj, tail], axis=1)
            P += extra
        chains = ChainArray(traj)
        x = chains.flat
        _, W, rec = run.record(
            t, x, None, run.log_potential(t, x), P=P, kernel=kernel, kernel_steps=M * (P - 1), layout_M=M
        )
        run.close_segment(rec)
    return run.finish(chains=chains, weights=W)


def run_waste_free_growing(
    model: FeynmanKacModel,
    M: int,
    P: int,
    ess_threshold_fraction: float,
    seed: int,
    estimands=None,
    variance_estimator: str | None = "tukey_hanning",
    max_iter: int = MAX_ITERATIONS,
) -> RunTrace:
    """Waste-free SMC for models whose state grows by one component per step.

    Each step extends every particle (``model.extend``) and multiplies its
    weight by ``G_t``; when the ESS drops below ``ess_threshold_fraction * N``
    the population is rebuilt from ``M`` resampled particles moved through
    ``P - 1`` steps of the ``pi_t``-invariant kernel, with uniform weights.
    Variance terms cover the stretch since the last rebuild.
    """
    if M < 1 or P < 2:
        raise ValueError(f"need M >= 1 and P >= 2, got M={M}, P={P}")
    if not 0.0 <= ess_threshold_fraction < 1.0:
        raise ValueError(f"ess_threshold_fraction must lie in [0, 1), got {ess_threshold_fraction}")
    N = M * P
    run = _Run(model, estimands, variance_estimator)
    t = 0
    x = model.sample_initial(N, rng_stream(seed, 0))
    log_w, W, _ = run.record(0, x, None, run.log_potential(0, x), P=P, kernel=None, kernel_steps=0)
    layout_M = None
    chains = None
    while not model.is_terminal(t):
        t += 1
        _check_cap(t, max_iter)
        rng = rng_stream(seed, t)
        x = model.extend(t, x, rng)
        log_w, W, rec = run.record(
            t, x, log_w, run.log_potential(t, x), P=P, kernel=None, kernel_steps=0, layout_M=layout_M
        )
        if model.is_terminal(t):
            break
        if rec.ess < ess_threshold_fraction * N:
            run.close_segment(rec)
            starts = x[multinomial_resample(W, M, rng)]
            kernel = model.kernel(t, starts)
            chains = ChainArray(kernel.chain(starts, P, rng))
            x = chains.flat
            log_w = np.zeros(N)
            W = np.full(N, 1.0 / N)
            layout_M = M
            rec.rejuvenated = True
            rec.kernel_steps = M * (P - 1)
            rec.acc_rate = kernel.acceptance_rate
            run.trace.kernel_steps += rec.kernel_steps
    return run.finish(chains=chains, weights=W)
