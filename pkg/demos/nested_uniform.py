"""
Waste-free versus standard SMC on nested uniform sets
=====================================================

The target at time t is uniform on [0, r**t]. The kernel is a mixture that
either stays put or draws a fresh uniform point, so the normalising constant
and every inflation factor are known in closed form.
"""

import numpy as np

from wastefree.problems.nested_uniform import (
    NestedUniformFK,
    NestedUniformModel,
    critical_k,
    inflation_std_limit,
    inflation_wf,
)
from wastefree.samplers import run_standard_smc, run_waste_free_smc

model = NestedUniformModel(r=0.1, p=0.05, T=5)
print("true log L_T:", model.log_norm_const(model.T))
print("critical k for standard SMC:", critical_k(model.r, model.p))
# Inflation per unit of budget: standard SMC spends k kernel steps per particle.
print("inflation, waste-free:", inflation_wf(model.r, model.p))
for k in (25, 125):
    print(f"inflation x k, standard k={k}:", k * inflation_std_limit(k, model.r, model.p))

# Same budget of 10**6 kernel steps per run for both samplers.
runs = 20
wf = [run_waste_free_smc(NestedUniformFK(model), M=10, P=20001, seed=s, variance_estimator=None).log_L
      for s in range(runs)]
print(f"waste-free M=10:     mean log L {np.mean(wf):.4f}, variance {np.var(wf, ddof=1):.5f}")

for k in (1, 25, 125):
    std = [run_standard_smc(NestedUniformFK(model), N=200000 // k, k=k, seed=s).log_L for s in range(runs)]
    print(f"standard k={k:<4d}     mean log L {np.mean(std):.4f}, variance {np.var(std, ddof=1):.5f}")

# A single waste-free run also reports its own variance estimate.
tr = run_waste_free_smc(NestedUniformFK(model), M=50, P=200, seed=0)
print("single-run estimate of Var(log L):", tr.var_log_L)
