"""Multinomial resampling."""

from __future__ import annotations

import numpy as np

__all__ = ["multinomial_resample", "sorted_uniforms"]


def sorted_uniforms(count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` ordered Uniform(0, 1) variates, via normalised exponential spacings."""
    spacings = np.cumsum(rng.standard_exponential(count + 1))
    return spacings[:-1] / spacings[-1]


def multinomial_resample(weights, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` IID ancestor indices with ``P(index = n) = weights[n]``.

    One sweep of the cumulative weights against sorted uniforms, so the
    returned indices come out in non-decreasing order.
    """
    w = np.asarray(weights, dtype=float)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    cdf = np.cumsum(w)
    u = sorted_uniforms(count, rng) * cdf[-1]
    # side="right" never lands on a zero-weight index
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, w.size - 1)
