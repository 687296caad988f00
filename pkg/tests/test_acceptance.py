"""Acceptance suite: each test checks one end-to-end criterion and prints one
PASS/FAIL line with the measured value and the tolerance it was held to.

Run with ``pytest tests/test_acceptance.py -v``. The full suite takes a few
minutes on one core; the Latin-square and matched-budget checks dominate.
"""

import itertools
import math
import warnings

import numpy as np
import pytest

from oracles import ar1_chains, bivariate_orthant, count_latin_squares, logistic_log_evidence_2d
from wastefree.problems.latin import latin_fk, log_num_permutation_squares
from wastefree.problems.logistic import logistic_fk, synthetic_logistic
from wastefree.problems.nested_uniform import (
    NestedUniformFK,
    NestedUniformModel,
    critical_k,
    inflation_std_limit,
    inflation_wf,
)
from wastefree.problems.orthant import OrthantModel, orthant_fk
from wastefree.samplers import (
    run_standard_smc,
    run_waste_free_adaptive_p,
    run_waste_free_growing,
    run_waste_free_smc,
)
from wastefree.variance import mchain_variance

IDENTITY = {"x": lambda x: x}


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return emit


def _within_se(values, target, n_se, floor=0.0):
    v = np.asarray(values, dtype=float)
    se = max(v.std(ddof=1) / math.sqrt(v.size), floor)
    return abs(v.mean() - target) <= n_se * se, v.mean(), se


def test_c01_unbiased_normalising_constant(report):
    m = NestedUniformModel(0.5, 0.5, 5)
    vals = [math.exp(run_waste_free_smc(NestedUniformFK(m), 20, 100, seed=s, variance_estimator=None).log_L)
            for s in range(2000)]
    ok, mean, se = _within_se(vals, 0.5**5, 4)
    report("C1 unbiasedness", ok, f"mean exp(log L)={mean:.6f}, target 0.03125, |z|={abs(mean - 0.03125) / se:.2f} <= 4")


def test_c02_waste_free_inflation(report):
    m = NestedUniformModel(0.5, 0.5, 5)
    M, P = 10, 2000
    Q = [run_waste_free_smc(NestedUniformFK(m), M, P, seed=s, estimands=IDENTITY, variance_estimator=None).estimates["x"]
         for s in range(500)]
    ratio = M * P * np.var(Q, ddof=1) / m.target_variance(5)
    target = inflation_wf(0.5, 0.5)
    ok = abs(ratio / target - 1) <= 0.2
    report("C2 waste-free inflation", ok, f"N Var(Q_5)/Var_pi(x)={ratio:.3f}, target {target:.1f} +/- 20%")


def _std_growth(k, N, runs):
    m = NestedUniformModel(0.04, 0.5, 4)
    est = {t: [] for t in (2, 3, 4)}
    for s in range(runs):
        tr = run_standard_smc(NestedUniformFK(m), N, k, seed=s, estimands=IDENTITY)
        for rec in tr.iterations:
            if rec.t in est:
                est[rec.t].append(rec.estimates["x"])
    infl = {t: N * np.var(v, ddof=1) / m.target_variance(t) for t, v in est.items()}
    # geometric-mean growth over t = 2 -> 3 -> 4
    return math.sqrt(infl[4] / infl[2]), infl


def test_c03_geometric_blow_up(report):
    assert critical_k(0.04, 0.5) == pytest.approx(2.3219, abs=1e-4)
    target = 0.5**2 / 0.04
    g1, infl1 = _std_growth(1, 10**6, 150)
    g4, _ = _std_growth(4, 10**5, 200)
    ok1 = abs(g1 / target - 1) <= 0.35
    ok4 = g4 <= 1.2
    detail = (f"k=1 growth={g1:.3f} (target {target} +/- 35%, inflation by t: "
              f"{', '.join(f'{v:.0f}' for v in infl1.values())}); k=4 growth={g4:.3f} <= 1.2")
    report("C3 geometric blow-up", ok1 and ok4, detail)


def test_c04_inflation_bound(report):
    worst = 0.0
    for r, p, k in itertools.product((0.1, 0.25, 0.5), (0.1, 0.5, 0.9), (1, 2, 4)):
        worst = max(worst, inflation_wf(r, p) / (k * inflation_std_limit(k, r, p)))
    report("C4 inflation bound", worst <= 4.0, f"max ratio over grid={worst:.4f} <= 4")


def test_c05_latin_square_count(report):
    assert count_latin_squares(4) == 576
    log_p4 = log_num_permutation_squares(4)
    ests = np.array([math.exp(run_waste_free_smc(latin_fk(4, 1e-16, 0.5), 20, 1000, seed=s,
                                                 variance_estimator=None).log_L + log_p4)
                     for s in range(100)])
    hits = int(np.sum(np.abs(ests / 576 - 1) <= 0.15))
    report("C5 Latin squares d=4", hits >= 95,
           f"{hits}/100 runs within 15% of 576 (need >= 95); mean estimate {ests.mean():.1f}")


def test_c06_orthant_probabilities(report):
    a_model = OrthantModel(np.zeros(3), np.eye(3))
    va = [math.exp(run_waste_free_growing(orthant_fk(a_model), 50, 20, 0.5, seed=s).log_L) for s in range(200)]
    # constant potentials give zero spread; floor the SE so the check is well defined
    ok_a, mean_a, se_a = _within_se(va, 0.125, 4, floor=1e-12)
    b_model = OrthantModel(np.ones(2), np.array([[1.0, 0.5], [0.5, 1.0]]))
    oracle = bivariate_orthant((1.0, 1.0), 0.5)
    vb = [math.exp(run_waste_free_growing(orthant_fk(b_model), 100, 10, 0.5, seed=s).log_L) for s in range(200)]
    ok_b, mean_b, se_b = _within_se(vb, oracle, 4)
    report("C6 orthant probabilities", ok_a and ok_b,
           f"(a) mean={mean_a:.12f} vs 0.125; (b) mean={mean_b:.6f} vs quadrature {oracle:.6f}, "
           f"|z|={abs(mean_b - oracle) / se_b:.2f} <= 4")


def test_c07_variance_estimator_calibration(report):
    chains = ar1_chains(100, 10**4, 0.5, 4 / 3, seed=2)
    geyer = mchain_variance(chains, estimator="geyer")
    th = mchain_variance(chains, estimator="tukey_hanning")
    ok_ar = abs(geyer / 4 - 1) <= 0.1 and abs(th / 4 - 1) <= 0.1
    m = NestedUniformModel(0.5, 0.5, 5)
    ratios = {}
    for est in ("geyer", "tukey_hanning"):
        trs = [run_waste_free_smc(NestedUniformFK(m), 50, 200, seed=s, estimands=IDENTITY, variance_estimator=est)
               for s in range(100)]
        q = np.array([t.estimates["x"] for t in trs])
        v = np.array([t.variances["x"] for t in trs])
        ratios[est] = v.mean() / np.var(q, ddof=1)
    ok_nu = all(0.5 <= r <= 2 for r in ratios.values())
    report("C7 variance calibration", ok_ar and ok_nu,
           f"AR(1) geyer={geyer:.3f}, tukey_hanning={th:.3f} (4 +/- 10%); nested-uniform ratio "
           f"geyer={ratios['geyer']:.3f}, tukey_hanning={ratios['tukey_hanning']:.3f} in [0.5, 2]")


def test_c08_log_norm_const_variance(report):
    m = NestedUniformModel(0.5, 0.5, 5)
    trs = [run_waste_free_smc(NestedUniformFK(m), 50, 200, seed=s) for s in range(200)]
    ratio = np.mean([t.var_log_L for t in trs]) / np.var([t.log_L for t in trs], ddof=1)
    report("C8 Var(log L) estimate", 0.5 <= ratio <= 2, f"estimated/empirical={ratio:.3f} in [0.5, 2]")


def test_c09_adaptive_tempering(report):
    data = synthetic_logistic(20, 1, seed=0)
    oracle = logistic_log_evidence_2d(data.design, data.responses, data.prior_sd)
    M, P = 100, 100
    N = M * P
    tr = run_waste_free_smc(logistic_fk(data, alpha=0.5), M, P, seed=0)
    worst = max(abs(rec.ess - 0.5 * N) / N for rec in tr.iterations[1:] if rec.exponent < 1.0)
    ok_ess = all(abs(rec.ess - 0.5 * N) <= 1e-6 * N or rec.exponent == 1.0 for rec in tr.iterations[1:])
    se = math.sqrt(tr.var_log_L)
    z = (tr.log_L - oracle) / se
    report("C9 adaptive tempering", ok_ess and abs(z) <= 3,
           f"{tr.T} steps, max |ESS - N/2|/N={worst:.2e} <= 1e-6; log L={tr.log_L:.4f} vs quadrature "
           f"{oracle:.4f}, |z|={abs(z):.2f} <= 3")


def test_c10_matched_budget(report):
    m = NestedUniformModel(0.1, 0.05, 5)
    per_iter = 2 * 10**5
    runs = 200
    wf = [run_waste_free_smc(NestedUniformFK(m), 10, per_iter // 10 + 1, seed=s, variance_estimator=None)
          for s in range(runs)]
    assert wf[0].kernel_steps == 10**6
    var_wf = np.var([t.log_L for t in wf], ddof=1)
    var_std = {}
    for k in (1, 5, 25, 125):
        trs = [run_standard_smc(NestedUniformFK(m), per_iter // k, k, seed=s) for s in range(runs)]
        assert trs[0].kernel_steps == 10**6
        var_std[k] = np.var([t.log_L for t in trs], ddof=1)
    best = min(var_std.values())
    report("C10 matched budget", var_wf <= 1.5 * best,
           f"Var(log L) waste-free={var_wf:.5f}, standard " + ", ".join(f"k={k}: {v:.5f}" for k, v in var_std.items())
           + f"; ratio to best={var_wf / best:.3f} <= 1.5")


def test_c11_adaptive_p(report):
    finals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for s in range(100):
            tr = run_waste_free_adaptive_p(NestedUniformFK(NestedUniformModel(0.5, 0.01, 5)), M=50, kappa=5.0,
                                           initial_P=16, max_P=8192, seed=s, variance_estimator=None)
            finals.append(tr.iterations[-1].P)
    hits = sum(P in (256, 512, 1024) for P in finals)
    values, counts = np.unique(finals, return_counts=True)
    report("C11 adaptive P", hits >= 95,
           f"{hits}/100 final P in {{256, 512, 1024}} (need >= 95); distribution "
           + ", ".join(f"{v}: {c}" for v, c in zip(values, counts)))
