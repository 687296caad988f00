"""Random streams and the primitive distributions used by the samplers.

Every random draw in the package goes through a :class:`numpy.random.Generator`
obtained from :func:`rng_stream`, which derives independent substreams from a
master seed and an integer path such as ``(t,)`` or ``(t, m)``.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = [
    "rng_stream",
    "standard_normal",
    "truncated_normal",
    "truncated_normal_lower",
    "log_normal_cdf_neg",
]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
# below this lower bound plain rejection from N(0, 1) beats the exponential proposal
_EXP_THRESHOLD = 0.47


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator keyed by ``(seed, path)``.

    Distinct paths give statistically independent streams (``SeedSequence``
    spawn keys); identical ``(seed, path)`` pairs reproduce identical draws.
    """
    seq = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(seq))


def standard_normal(rng: np.random.Generator, size=None):
    return rng.standard_normal(size)


def log_normal_cdf_neg(x):
    """log Phi(-x), accurate far into the upper tail of ``x``."""
    return special.log_ndtr(-np.asarray(x, dtype=float))


def truncated_normal_lower(lower, rng: np.random.Generator):
    """Draw N(0, 1) conditioned on ``[lower, inf)``, elementwise over ``lower``.

    Uses exponential-proposal rejection for ``lower > 0.47`` and plain rejection
    otherwise, so the expected number of trials stays bounded at any level.
    """
    lower = np.asarray(lower, dtype=float)
    return truncated_normal(lower, np.full_like(lower, np.inf), rng)


def truncated_normal(lower, upper, rng: np.random.Generator):
    """Draw N(0, 1) conditioned on ``[lower, upper]``, elementwise.

    Infinite bounds are allowed. For each element the rejection scheme with the
    highest acceptance probability is picked among plain normal, exponential
    tail and uniform proposals.
    """
    lower, upper = np.broadcast_arrays(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))
    shape = lower.shape
    a = lower.ravel().copy()
    b = upper.ravel().copy()
    if np.any(a > b):
        raise ValueError("empty truncation interval")

    # reflect intervals lying entirely below zero
    flip = b <= 0.0
    a[flip], b[flip] = -b[flip], -a[flip]

    out = np.empty(a.shape)
    degenerate = a == b
    out[degenerate] = a[degenerate]

    m = np.maximum(a, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        width = b - a
        log_unif = _LOG_SQRT_2PI + 0.5 * m**2 - np.log(width)
        alpha = 0.5 * (a + np.sqrt(a**2 + 4.0))
        log_exp = np.log(alpha) + alpha * a - 0.5 * alpha**2 + _LOG_SQRT_2PI
    use_exp = a > _EXP_THRESHOLD
    # acceptance probability per proposal, up to the common factor P(a <= Z <= b)
    log_tail = np.where(use_exp, log_exp, 0.0)
    use_unif = (~degenerate) & np.isfinite(width) & (log_unif > log_tail)
    use_exp &= ~use_unif & ~degenerate
    use_naive = ~(use_unif | use_exp | degenerate)

    for mask, sampler in ((use_naive, _naive), (use_exp, _exponential), (use_unif, _uniform)):
        idx = np.flatnonzero(mask)
        if idx.size:
            out[idx] = sampler(a[idx], b[idx], rng)

    out[flip] = -out[flip]
    return out.reshape(shape) if shape else out[0]


def _naive(a, b, rng):
    out = np.empty(a.shape)
    pending = np.arange(a.size)
    while pending.size:
        z = rng.standard_normal(pending.size)
        ok = (z >= a[pending]) & (z <= b[pending])
        out[pending[ok]] = z[ok]
        pending = pending[~ok]
    return out


def _exponential(a, b, rng):
    out = np.empty(a.shape)
    pending = np.arange(a.size)
    while pending.size:
        lo = a[pending]
        alpha = 0.5 * (lo + np.sqrt(lo**2 + 4.0))
        z = lo + rng.exponential(size=pending.size) / alpha
        u = rng.random(pending.size)
        ok = (u <= np.exp(-0.5 * (z - alpha) ** 2)) & (z <= b[pending])
        out[pending[ok]] = z[ok]
        pending = pending[~ok]
    return out


def _uniform(a, b, rng):
    out = np.empty(a.shape)
    pending = np.arange(a.size)
    while pending.size:
        lo, hi = a[pending], b[pending]
        m = np.maximum(lo, 0.0)
        z = lo + (hi - lo) * rng.random(pending.size)
        u = rng.random(pending.size)
        ok = u <= np.exp(0.5 * (m**2 - z**2))
        out[pending[ok]] = z[ok]
        pending = pending[~ok]
    return out
