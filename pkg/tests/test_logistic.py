import warnings

import numpy as np
import pytest

from ordinal_risk.data_model import Dataset
from ordinal_risk.errors import RankDeficientError, SeparationWarning
from ordinal_risk.logistic import fit_lr, gradient, hessian, log_likelihood, predict


def simulated(seed=0, n=2000):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, 2))])
    beta = np.array([-0.5, 1.0, -2.0])
    y = (rng.random(n) < 1 / (1 + np.exp(-X @ beta))).astype(int)
    return Dataset(X, y), beta


def fd_gradient(f, x, h=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def test_gradient_finite_difference():
    d, beta = simulated()
    b = beta + 0.3
    fd = fd_gradient(lambda v: log_likelihood(v, d), b)
    np.testing.assert_allclose(gradient(b, d), fd, rtol=1e-6)


def test_hessian_finite_difference():
    d, beta = simulated()
    H = hessian(beta, d)
    fd = np.array([fd_gradient(lambda v: gradient(v, d)[i], beta) for i in range(3)])
    np.testing.assert_allclose(H, fd, rtol=1e-6, atol=1e-6)
    assert np.all(np.linalg.eigvalsh(H) < 0)


def test_fit_recovers_truth():
    d, beta = simulated(n=20000)
    fit = fit_lr(d)
    assert fit.converged
    se = np.sqrt(np.diag(np.linalg.inv(-hessian(fit.beta, d))))
    assert np.all(np.abs(fit.beta - beta) < 4 * se)
    assert np.max(np.abs(gradient(fit.beta, d))) < 1e-6


def test_fit_matches_scipy_optimizer():
    from scipy.optimize import minimize
    d, _ = simulated(3, 500)
    fit = fit_lr(d)
    res = minimize(lambda v: -log_likelihood(v, d), np.zeros(3), jac=lambda v: -gradient(v, d), method="BFGS",
                   options={"gtol": 1e-10})
    np.testing.assert_allclose(fit.beta, res.x, atol=1e-5)


def test_predict():
    assert predict([0.0, 1.0], [1.0, 0.0]) == 0.5
    with pytest.raises(ValueError):
        predict([0.0], [1.0, 2.0])


def test_rank_deficient():
    X = np.column_stack([np.ones(10), np.arange(10), 2 * np.arange(10)])
    with pytest.raises(RankDeficientError):
        fit_lr(Dataset(X, np.arange(10) % 2))


def test_separation_warning():
    X = np.column_stack([np.ones(20), np.arange(20.0)])
    y = (np.arange(20) >= 10).astype(int)
    with pytest.warns(SeparationWarning):
        fit = fit_lr(Dataset(X, y))
    assert fit.separated


def test_wdbc_fit(wdbc):
    fit = fit_lr(wdbc)
    assert fit.converged
    assert fit.log_likelihood == pytest.approx(-45.9909, abs=1e-3)
    np.testing.assert_allclose(fit.beta, [-87.66405, 0.28638, 11.97056, 67.73416, -1.81067, 3.66973, 3.25562],
                               atol=5e-4)
