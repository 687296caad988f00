"""
Counting Latin squares
======================

Permutation squares are tempered towards exp(-lambda V), where V counts
column clashes. Scaling the final normalising constant by the number of
permutation squares estimates the number of Latin squares.
"""

import math

import numpy as np

from wastefree.problems.latin import latin_fk, latin_score, log_num_permutation_squares, TABLE_SQUARE_10
from wastefree.samplers import run_waste_free_smc

print("the 10x10 example square has score", latin_score(TABLE_SQUARE_10))

d = 4
estimates = []
for s in range(10):
    tr = run_waste_free_smc(latin_fk(d, epsilon=1e-16), M=20, P=1000, seed=s, variance_estimator=None)
    estimates.append(math.exp(tr.log_L + log_num_permutation_squares(d)))
    print(f"run {s}: {tr.T} tempering steps, final lambda {tr.iterations[-1].exponent:.2f}, "
          f"estimate {estimates[-1]:.1f}")
print("mean estimate:", np.mean(estimates), "(exact count 576)")
