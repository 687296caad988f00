"""Counting Latin squares by tempering over permutation squares.

A permutation square of size ``d`` has every row a permutation of
``0..d-1``; there are ``p(d) = (d!)**d`` of them. The column score ``V`` is
zero exactly on Latin squares, so the normalising constant of
``uniform * exp(-lambda V)`` times ``p(d)`` tends to the number of Latin
squares as ``lambda`` grows.
"""

from __future__ import annotations

import math

import numpy as np

from wastefree.adaptation import TemperedModel
from wastefree.kernels import LatinSwapKernel

__all__ = [
    "latin_score",
    "log_num_permutation_squares",
    "latin_stopping_exponent",
    "uniform_permutation_squares",
    "is_latin_square",
    "latin_fk",
    "TABLE_SQUARE_10",
]

TABLE_SQUARE_10 = np.array(
    [
        [1, 5, 0, 3, 7, 8, 9, 6, 2, 4],
        [0, 4, 5, 8, 6, 9, 1, 7, 3, 2],
        [2, 8, 7, 0, 9, 4, 5, 3, 1, 6],
        [3, 7, 4, 1, 5, 2, 8, 0, 6, 9],
        [6, 0, 9, 5, 1, 3, 2, 8, 4, 7],
        [8, 2, 1, 9, 4, 0, 6, 5, 7, 3],
        [9, 6, 3, 2, 0, 5, 7, 4, 8, 1],
        [5, 1, 6, 4, 3, 7, 0, 2, 9, 8],
        [4, 9, 2, 7, 8, 6, 3, 1, 5, 0],
        [7, 3, 8, 6, 2, 1, 4, 9, 0, 5],
    ]
)


def latin_score(x) -> np.ndarray:
    """``V(x) = sum_j (sum_l c_jl**2 - d)`` where ``c_jl`` counts symbol ``l`` in column ``j``.

    Works on a single ``(d, d)`` square or any batch ``(..., d, d)``.
    """
    x = np.asarray(x)
    d = x.shape[-1]
    counts = (x[..., None] == np.arange(d)).sum(axis=-3)
    return (counts**2).sum(axis=(-2, -1)) - d * d


def is_latin_square(x) -> np.ndarray:
    """Every column of every row-permutation square is itself a permutation."""
    x = np.asarray(x)
    d = x.shape[-1]
    return np.all(np.sort(x, axis=-2) == np.arange(d)[:, None], axis=(-2, -1))


def log_num_permutation_squares(d: int) -> float:
    return d * math.lgamma(d + 1)


def latin_stopping_exponent(d: int, epsilon: float = 1e-16) -> float:
    """``log(p(d) / epsilon)``: beyond it ``L * p(d)`` is within ``epsilon`` of the count."""
    if d < 2 or epsilon <= 0.0:
        raise ValueError("need d >= 2 and epsilon > 0")
    return log_num_permutation_squares(d) - math.log(epsilon)


def uniform_permutation_squares(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    rows = np.broadcast_to(np.arange(d), (n, d, d)).copy()
    return rng.permuted(rows, axis=2)


def latin_fk(d: int, epsilon: float = 1e-16, alpha: float = 0.5) -> TemperedModel:
    """Adaptive tempering in ``lambda`` up to :func:`latin_stopping_exponent`."""
    log_p = log_num_permutation_squares(d)

    def build_kernel(log_target, lam, x):
        return LatinSwapKernel(lam)

    return TemperedModel(
        lambda n, rng: uniform_permutation_squares(n, d, rng),
        lambda x: np.full(len(x), -log_p),
        lambda x: -latin_score(x).astype(float),
        build_kernel,
        alpha=alpha,
        gamma_max=latin_stopping_exponent(d, epsilon),
    )
