"""Two-class logistic regression: prediction, log-likelihood and its derivatives,
and a Newton fit with step halving."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data_model import Dataset
from .errors import RankDeficientError, SeparationWarning
from .special_math import ToleranceConfig, logistic


@dataclass(frozen=True)
class LogisticFit:
    beta: np.ndarray
    log_likelihood: float
    converged: bool
    iterations: int
    separated: bool = False


def _check_dims(beta, X):
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 1 or beta.shape[0] != X.shape[-1]:
        raise ValueError(f"beta has shape {beta.shape}, expected ({X.shape[-1]},)")
    return beta


def predict(beta, x):
    x = np.asarray(x, dtype=float)
    beta = _check_dims(beta, x)
    return logistic(x @ beta)


def log_likelihood(beta, data: Dataset) -> float:
    """sum_j y_j s_j - sum_j log(1 + e^{s_j}) with s = X beta."""
    beta = _check_dims(beta, data.features)
    s = data.features @ beta
    return float(data.labels @ s - np.logaddexp(0.0, s).sum())


def gradient(beta, data: Dataset) -> np.ndarray:
    beta = _check_dims(beta, data.features)
    X = data.features
    return X.T @ (data.labels - logistic(X @ beta))


def hessian(beta, data: Dataset) -> np.ndarray:
    beta = _check_dims(beta, data.features)
    X = data.features
    p = logistic(X @ beta)
    return -(X.T * (p * (1.0 - p))) @ X


def fit_lr(data: Dataset, cfg: ToleranceConfig | None = None, beta0=None) -> LogisticFit:
    """Maximum-likelihood logistic regression by Newton's method.

    Each step is halved until the log-likelihood does not decrease. Stops when
    the gradient max-norm is at most ``cfg.abs_tol``. Near-separable data that
    drives the coefficients off to infinity raises a :class:`SeparationWarning`
    and returns the last iterate.
    """
    cfg = cfg or ToleranceConfig(abs_tol=1e-9, max_iter=100)
    X = data.features
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficientError("design matrix is not of full column rank")
    beta = np.zeros(X.shape[1]) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    ll = log_likelihood(beta, data)
    converged = False
    separated = False
    it = 0
    for it in range(1, int(cfg.max_iter) + 1):
        g = gradient(beta, data)
        if np.max(np.abs(g)) <= cfg.abs_tol:
            converged = True
            it -= 1
            break
        H = hessian(beta, data)
        try:
            step = np.linalg.solve(-H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(-H, g, rcond=None)[0]
        t = 1.0
        while True:
            cand = beta + t * step
            ll_c = log_likelihood(cand, data)
            if ll_c >= ll or t < 1e-12:
                break
            t *= 0.5
        if ll_c < ll:
            break
        beta, ll = cand, ll_c
        if ll > -1e-8 * data.n or np.max(np.abs(beta)) > 1e8:
            separated = True
            break
    else:
        converged = np.max(np.abs(gradient(beta, data))) <= cfg.abs_tol
    if not converged and np.max(np.abs(gradient(beta, data))) <= cfg.abs_tol:
        converged = True
    if separated:
        warnings.warn("classes appear perfectly separated; coefficients are diverging", SeparationWarning,
                      stacklevel=2)
    return LogisticFit(beta=beta, log_likelihood=ll, converged=bool(converged), iterations=it,
                       separated=separated)
