"""
Tempered logistic regression
============================

Adaptive tempering picks each exponent so that the ESS equals alpha * N.
On a two-coefficient model the marginal likelihood is cheap to check by
quadrature. Pass the path of the sonar CSV to run on that data set instead.
"""

import math
import sys

from wastefree.problems.logistic import load_sonar, logistic_fk, synthetic_logistic
from wastefree.samplers import run_waste_free_smc

if len(sys.argv) > 1:
    model = load_sonar(sys.argv[1])
else:
    model = synthetic_logistic(n=20, n_predictors=1, seed=0)
print("dimension:", model.dim, "observations:", len(model.responses))

tr = run_waste_free_smc(logistic_fk(model, alpha=0.5), M=100, P=100, seed=0,
                        estimands={"intercept": lambda x: x[:, 0]})

for rec in tr.iterations:
    print(f"t={rec.t:2d}  exponent={rec.exponent:.5f}  ESS={rec.ess:8.1f}  "
          f"acceptance={rec.acc_rate if rec.acc_rate is not None else float('nan'):.3f}")

print(f"log L = {tr.log_L:.4f} +/- {math.sqrt(tr.var_log_L):.4f}")
print(f"posterior mean intercept = {tr.estimates['intercept']:.4f}")
