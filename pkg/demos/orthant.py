"""
Gaussian orthant probabilities
==============================

P(Z >= a) is built one coordinate at a time: each new coordinate is drawn
from a truncated normal and weighted by the probability of its constraint.
The growing sampler rejuvenates with Gibbs sweeps when the ESS drops.
"""

import math

import numpy as np
from scipy import stats

from wastefree.problems.orthant import OrthantModel, ar1_correlation, orthant_fk
from wastefree.samplers import run_waste_free_growing

d = 10
sigma = ar1_correlation(d, 0.5)
a = np.full(d, 0.5)
model = OrthantModel(a, sigma)

runs = [math.exp(run_waste_free_growing(orthant_fk(model), M=100, P=10, ess_threshold_fraction=0.5, seed=s).log_L)
        for s in range(20)]
reference = stats.multivariate_normal(np.zeros(d), sigma).cdf(-a)
print(f"SMC:   {np.mean(runs):.6e} +/- {np.std(runs, ddof=1) / math.sqrt(len(runs)):.1e}")
print(f"scipy: {reference:.6e}")
