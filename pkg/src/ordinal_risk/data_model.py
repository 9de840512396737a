"""Data containers, Gaussian class-conditional estimation and projection of the
estimates onto a coefficient vector."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import DatasetError, DegenerateProjectionError, EstimationError
from .special_math import logistic

Norm = Literal["euclidean", "squared_euclidean", "max_abs"]
NORMS = ("euclidean", "squared_euclidean", "max_abs")
CovarianceKind = Literal["pooled", "total"]


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple = ()

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        y = np.array(self.labels)
        if X.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DatasetError("labels must be a vector with one entry per row")
        if X.shape[0] < 2:
            raise DatasetError("need at least two observations")
        if not np.all(np.isin(y, (0, 1))):
            raise DatasetError("labels must be 0/1")
        if not np.all(np.isfinite(X)):
            raise DatasetError("features contain non-finite values")
        y = y.astype(int)
        n1 = int(y.sum())
        if n1 == 0 or n1 == y.size:
            raise DatasetError("both classes must be present")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DatasetError("feature_names length does not match the number of columns")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def class_counts(self) -> tuple[int, int]:
        n1 = int(self.labels.sum())
        return self.n - n1, n1

    def subset(self, rows) -> "Dataset":
        return Dataset(self.features[rows], self.labels[rows], self.feature_names)


@dataclass(frozen=True)
class RiskSpec:
    r: tuple
    epsilon: float = 1e-7
    norm: str = "euclidean"

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        if len(r) < 2:
            raise ValueError("need at least two risk levels")
        if any(not 0.0 <= v <= 1.0 for v in r):
            raise ValueError("risk levels must lie in [0, 1]")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise ValueError("risk levels must be strictly increasing")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}")
        object.__setattr__(self, "r", r)

    @property
    def T(self) -> int:
        return len(self.r)

    @property
    def r_array(self) -> np.ndarray:
        return np.asarray(self.r)


@dataclass(frozen=True, eq=False)
class GaussianEstimates:
    mu0: np.ndarray
    mu1: np.ndarray
    sigma_pooled: np.ndarray
    p_hat: float
    covariance: str = "pooled"
    # pseudo-inverse over non-constant columns; gives the max-separation direction
    _sigma_pinv: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def delta_mu(self) -> np.ndarray:
        return self.mu1 - self.mu0


@dataclass(frozen=True)
class ProjectedGaussian:
    mu0_beta: float
    mu1_beta: float
    sigma_beta: float
    p: float

    def __post_init__(self):
        if not self.sigma_beta > 0:
            raise DegenerateProjectionError("projected standard deviation must be > 0")
        if not 0.0 < self.p < 1.0:
            raise ValueError("class prior must lie in (0, 1)")

    @property
    def separation(self) -> float:
        """Standardized mean gap (mu1 - mu0) / sigma."""
        return (self.mu1_beta - self.mu0_beta) / self.sigma_beta

    def standardized(self) -> "ProjectedGaussian":
        return ProjectedGaussian(0.0, self.separation, 1.0, self.p)


@dataclass(frozen=True)
class Breakpoints:
    """Interior breakpoints on the score (logit) axis; tau_0=-inf, tau_T=+inf implied."""

    tau: tuple
    scale: str = "score"

    def __post_init__(self):
        tau = tuple(float(t) for t in np.atleast_1d(self.tau))
        if len(tau) < 1:
            raise ValueError("need at least one breakpoint")
        if any(not math.isfinite(t) for t in tau):
            raise ValueError("breakpoints must be finite")
        if any(b <= a for a, b in zip(tau, tau[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "tau", tau)

    @property
    def T(self) -> int:
        return len(self.tau) + 1

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate([[-np.inf], self.tau, [np.inf]])

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.tau)

    def to_probability(self) -> np.ndarray:
        return np.array([logistic(t) for t in self.tau])

    def scaled(self, c: float) -> "Breakpoints":
        return Breakpoints(tuple(c * t for t in self.tau), self.scale)


def _constant_columns(X: np.ndarray) -> np.ndarray:
    return np.all(X == X[0], axis=0)


def estimate_gaussian(data: Dataset, covariance: CovarianceKind = "pooled") -> GaussianEstimates:
    """Class means, common covariance and class-1 prior.

    ``covariance="pooled"`` is the within-class ML estimator
    ``(N0*S0 + N1*S1)/N`` with ``S_k`` normalized by ``N_k``.
    ``covariance="total"`` is the unbiased sample covariance of all rows,
    ignoring class; it is the estimator that reproduces the reference WDBC
    breakpoints and risk tables.

    Columns that are constant over the whole dataset (an intercept) are
    exempt from the positive-definiteness check.
    """
    X, y = data.features, data.labels
    X0, X1 = X[y == 0], X[y == 1]
    n0, n1 = X0.shape[0], X1.shape[0]
    if n0 < 2 or n1 < 2:
        raise DatasetError("each class needs at least two observations")
    mu0, mu1 = X0.mean(axis=0), X1.mean(axis=0)
    if covariance == "pooled":
        d0, d1 = X0 - mu0, X1 - mu1
        sigma = (d0.T @ d0 + d1.T @ d1) / data.n
    elif covariance == "total":
        sigma = np.cov(X, rowvar=False, ddof=1)
    else:
        raise ValueError(f"unknown covariance estimator {covariance!r}")
    sigma = 0.5 * (sigma + sigma.T)

    const = _constant_columns(X)
    keep = np.flatnonzero(~const)
    sub = sigma[np.ix_(keep, keep)]
    pinv = np.zeros_like(sigma)
    if keep.size:
        w, v = np.linalg.eigh(sub)
        scale = max(float(np.max(np.abs(np.diag(sub)))), np.finfo(float).tiny)
        if w[0] <= 1e-12 * scale:
            weights = np.abs(v[:, 0])
            offending = [data.feature_names[keep[j]] for j in np.flatnonzero(weights > 1e-3)]
            raise EstimationError(
                "covariance matrix is singular; collinear columns: " + ", ".join(offending), offending)
        pinv[np.ix_(keep, keep)] = (v / w) @ v.T
    est = GaussianEstimates(mu0=mu0, mu1=mu1, sigma_pooled=sigma, p_hat=n1 / data.n,
                            covariance=covariance, _sigma_pinv=pinv)
    for a in (mu0, mu1, sigma, pinv):
        a.setflags(write=False)
    return est


def project(est: GaussianEstimates, beta: Sequence[float]) -> ProjectedGaussian:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != est.mu0.shape:
        raise ValueError(f"beta has length {beta.size}, expected {est.mu0.size}")
    var = float(beta @ est.sigma_pooled @ beta)
    if not np.any(beta) or not var > 0:
        raise DegenerateProjectionError("projection has zero variance (sigma(beta) = 0)")
    return ProjectedGaussian(float(beta @ est.mu0), float(beta @ est.mu1), math.sqrt(var), est.p_hat)


def separation(est: GaussianEstimates, beta) -> float:
    """Standardized separation beta'(mu1-mu0)/sqrt(beta' S beta); scale invariant in beta."""
    beta = np.asarray(beta, dtype=float)
    var = float(beta @ est.sigma_pooled @ beta)
    if not var > 0:
        raise DegenerateProjectionError("projection has zero variance (sigma(beta) = 0)")
    return float(beta @ est.delta_mu) / math.sqrt(var)
