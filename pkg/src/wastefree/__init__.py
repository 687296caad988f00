"""Waste-free and standard sequential Monte Carlo samplers."""

from wastefree.core import (
    AllWeightsZero,
    FeynmanKacModel,
    NormConstAccumulator,
    WeightedSample,
    accumulate_norm_const,
    ess,
    normalize_log_weights,
)
from wastefree.distributions import rng_stream
from wastefree.samplers import (
    ChainArray,
    RunTrace,
    run_standard_smc,
    run_waste_free_adaptive_p,
    run_waste_free_growing,
    run_waste_free_smc,
)

__version__ = "0.1.0"

__all__ = [
    "AllWeightsZero",
    "ChainArray",
    "FeynmanKacModel",
    "NormConstAccumulator",
    "RunTrace",
    "WeightedSample",
    "accumulate_norm_const",
    "ess",
    "normalize_log_weights",
    "rng_stream",
    "run_standard_smc",
    "run_waste_free_adaptive_p",
    "run_waste_free_growing",
    "run_waste_free_smc",
]
