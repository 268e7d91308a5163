"""Smoke tests for the pybind11 module."""
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.environ.get("PLRM_MODULE_DIR", "."))
import _plrm as plrm  # noqa: E402

BETA0 = np.array([0.0, -0.9, 0.1, 0.6, -1.2, 0.8])


def make_data(seed=0, n=300, beta=BETA0):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, 2))])
    P = np.array([plrm.category_probabilities(X[i], beta, 2, 2) for i in range(n)])
    Y = np.array([rng.multinomial(1, P[i]) for i in range(n)], dtype=np.int32)
    return X, Y


def test_probabilities_normalize():
    pi = plrm.category_probabilities(np.array([1.0, 0.3, -0.8]), BETA0, 2, 2)
    assert pi.shape == (3,)
    assert abs(pi.sum() - 1.0) < 1e-12
    assert (pi > 0).all()


def test_fit_recovers_parameters():
    X, Y = make_data(seed=1, n=600)
    fit = plrm.fit(X, Y, 0.0)
    assert fit["converged"]
    assert np.linalg.norm(fit["beta"] - BETA0) < 0.6
    assert fit["sandwich_ok"]
    assert fit["se"].shape == (6,)
    # robust fit stays close to the MLE on pure data
    fit5 = plrm.fit(X, Y, 0.5)
    assert np.linalg.norm(fit5["beta"] - fit["beta"]) < 0.3


def test_estimating_function_vanishes_at_fit():
    X, Y = make_data(seed=2, n=200)
    fit = plrm.fit(X, Y, 0.4)
    u = plrm.estimating_function(X, Y, fit["beta"], 0.4)
    assert np.abs(u).max() / len(X) < 1e-6


def test_wald_test_null_behavior():
    X, Y = make_data(seed=3, n=400)
    res = plrm.wald_test(X, Y, 0.0, 3, 0.6)
    assert res["df"] == 1
    assert 0.0 <= res["p_value"] <= 1.0
    # testing the estimate against itself gives statistic ~ 0
    fit = plrm.fit(X, Y, 0.0)
    res0 = plrm.wald_test(X, Y, 0.0, 3, fit["beta"][3])
    assert res0["statistic"] < 1e-16


def test_select_lambda_trace():
    X, Y = make_data(seed=4, n=250)
    out = plrm.select_lambda(X, Y, [0.0, 0.25, 0.5, 0.75, 1.0], 0.3)
    assert out["lambda_opt"] in [0.0, 0.25, 0.5, 0.75, 1.0]
    mses = [r["mse"] for r in out["trace"] if not r["skipped"]]
    assert min(mses) == pytest.approx(
        [r["mse"] for r in out["trace"] if r["lambda"] == out["lambda_opt"]][0]
    )
    for r in out["trace"]:
        if not r["skipped"]:
            assert r["mse"] == pytest.approx(r["bias_sq"] + r["variance"])


def test_influence_leverage_contrast():
    X, Y = make_data(seed=5, n=150)
    fit = plrm.fit(X, Y, 0.0)
    norms = {}
    for lam in (0.0, 0.5):
        f = plrm.fit(X, Y, lam)
        vals = []
        for scale in (10.0, 1e4):
            x_probe = X[0].copy()
            x_probe[1:] = scale
            vals.append(
                np.linalg.norm(
                    plrm.influence(X, Y, f["beta"], lam, 0, 0, x_probe)
                )
            )
        norms[lam] = vals
    assert norms[0.0][1] > norms[0.0][0]  # MLE influence grows with leverage
    assert norms[0.5][1] < norms[0.5][0]  # robust influence decays


def test_study_determinism_and_metrics():
    kwargs = dict(
        beta_true=BETA0, k=2, d=2, contamination_pct=5.0, seed=99,
        lambdas=[0.0, 0.5], n_grid=[120], reps=20,
    )
    a = plrm.mse_study(**kwargs, threads=1)
    b = plrm.mse_study(**kwargs, threads=2)
    assert a["csv"] == b["csv"]
    for cell in a["cells"]:
        assert cell["valid_reps"] + cell["discarded"] == 20
    lv = plrm.level_study(
        beta_true=BETA0, k=2, d=2, contamination_pct=0.0, seed=7,
        lambdas=[0.0], n_grid=[150], reps=25, coefficient=3, value=0.6,
    )
    assert 0.0 <= lv["cells"][0]["value"] <= 0.25


def test_distribution_helpers():
    assert plrm.normal_cdf(0.0) == pytest.approx(0.5)
    assert plrm.chisq_quantile(0.95, 1) == pytest.approx(3.841459, abs=1e-5)
    assert plrm.noncentral_chisq_cdf(3.84, 1, 0.0) == pytest.approx(
        plrm.chisq_cdf(3.84, 1), abs=1e-14
    )


def test_power_round_trip():
    X, Y = make_data(seed=6, n=400)
    fit = plrm.fit(X, Y, 0.0)
    sigma = np.linalg.inv(fit["psi"])  # lambda = 0 sandwich
    LT = np.zeros((1, 6))
    LT[0, 3] = 1.0
    h = np.array([0.6])
    beta_star = BETA0.copy()
    beta_star[3] = 1.35
    n_req = plrm.required_sample_size(LT, h, beta_star, sigma, 0.05, 0.9)
    achieved = plrm.approximate_power(LT, h, beta_star, sigma, n_req, 0.05)
    assert achieved == pytest.approx(0.9, abs=0.02)
    assert math.isfinite(n_req) and n_req >= 1
