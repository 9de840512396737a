"""Distribution-free counterparts of the model quantities and the repeated
holdout cross-validation harness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data_model import Breakpoints, Dataset, GaussianEstimates, ProjectedGaussian, RiskSpec, estimate_gaussian, project
from .errors import DatasetError, OrdinalRiskError
from .logistic import fit_lr
from .org_solver import PenaltyConfig, SolverConfig, fit_org
from .risk_core import fit_breakpoints


@dataclass(frozen=True)
class IntervalRates:
    rates: np.ndarray   # NaN where the interval is empty
    counts: np.ndarray
    positives: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return self.counts > 0


def _edges(tau) -> np.ndarray:
    return np.asarray(tau.tau if isinstance(tau, Breakpoints) else Breakpoints(tuple(tau)).tau, dtype=float)


def group_index(scores, tau) -> np.ndarray:
    """0-based group of each score under right-closed intervals (tau_{i-1}, tau_i]."""
    return np.searchsorted(_edges(tau), np.asarray(scores, dtype=float), side="left")


def empirical_interval_risk(scores, labels, tau) -> IntervalRates:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    edges = _edges(tau)
    T = edges.size + 1
    idx = group_index(scores, edges)
    counts = np.bincount(idx, minlength=T)
    pos = np.bincount(idx, weights=(labels == 1).astype(float), minlength=T).astype(int)
    with np.errstate(invalid="ignore", divide="ignore"):
        rates = np.where(counts > 0, pos / np.maximum(counts, 1), np.nan)
    return IntervalRates(rates, counts, pos)


def empirical_class_cdf(scores, labels, k: int, t: float) -> float:
    scores = np.asarray(scores, dtype=float)
    sel = scores[np.asarray(labels) == k]
    if sel.size == 0:
        raise DatasetError(f"class {k} is absent")
    return float(np.count_nonzero(sel <= t)) / sel.size


def simulate_gaussian_pair(g: ProjectedGaussian | GaussianEstimates, n: int, seed: int, beta=None):
    """Labels ~ Bernoulli(p), scores from the matching class Gaussian."""
    if int(n) < 1:
        raise ValueError("n must be >= 1")
    if isinstance(g, GaussianEstimates):
        if beta is None:
            raise ValueError("beta is required with full Gaussian estimates")
        g = project(g, beta)
    rng = np.random.default_rng(seed)
    labels = (rng.random(int(n)) < g.p).astype(int)
    means = np.where(labels == 1, g.mu1_beta, g.mu0_beta)
    scores = means + g.sigma_beta * rng.standard_normal(int(n))
    return scores, labels


# -- cross-validation ---------------------------------------------------------

@dataclass(frozen=True)
class CvRepeat:
    index: int
    ok: bool
    reason: str = ""
    rates: tuple = ()
    counts: tuple = ()
    ird_squared: float = math.nan
    ird_euclidean: float = math.nan
    excluded_groups: int = 0


@dataclass(frozen=True)
class CvReport:
    method: str
    r: tuple
    repeats: tuple
    pooled_rates: tuple
    pooled_counts: tuple
    pooled_ird_squared: float
    pooled_ird_euclidean: float
    mean_ird_squared: float
    sd_ird_squared: float
    mean_ird_euclidean: float
    sd_ird_euclidean: float
    n_failed: int
    config: dict = field(default_factory=dict)


def _ird_defined(rates: np.ndarray, r: np.ndarray) -> tuple[float, float, int]:
    ok = np.isfinite(rates)
    d = rates[ok] - r[ok]
    sq = float(d @ d)
    return sq, math.sqrt(sq), int((~ok).sum())


def _fit_tau(train: Dataset, spec: RiskSpec, method: str, pen: PenaltyConfig, cfg: SolverConfig):
    """Returns (beta, Breakpoints) or raises with a failure reason."""
    lr = fit_lr(train)
    est = estimate_gaussian(train, cfg.covariance)
    if method == "lr":
        sol = fit_breakpoints(project(est, lr.beta), spec)
        if sol.breakpoints.gaps.size and float(np.min(sol.breakpoints.gaps)) < cfg.min_gap:
            raise _RepeatFailed("degenerate")
        return lr.beta, sol.breakpoints
    res = fit_org(train, spec, pen, cfg, est=est, beta_lr=lr.beta)
    if res.best.tau is None:
        raise _RepeatFailed("no breakpoints")
    if res.best.degenerate:
        raise _RepeatFailed("degenerate")
    if not res.best.feasible:
        raise _RepeatFailed("infeasible")
    return res.best.beta, res.best.tau


class _RepeatFailed(Exception):
    pass


def _split(rng, labels: np.ndarray, holdout: float, max_tries: int = 100):
    n = labels.size
    n_test = max(1, int(round(holdout * n)))
    if n_test >= n:
        raise ValueError("holdout leaves no training rows")
    for _ in range(max_tries):
        perm = rng.permutation(n)
        train = perm[n_test:]
        y = labels[train]
        if 2 <= y.sum() <= y.size - 2:
            return np.sort(train), np.sort(perm[:n_test])
    raise DatasetError("could not draw a training split with both classes present")


def cross_validate(data: Dataset, spec: RiskSpec, method: str = "lr", pen: PenaltyConfig | None = None,
                   cfg: SolverConfig | None = None, holdout: float = 0.1, repeats: int = 500,
                   seed: int = 0) -> CvReport:
    """Repeated random holdout. Each repeat fits on the training rows, scores
    the held-out rows with x'beta, groups them by the fitted breakpoints and
    compares observed malignant fractions with r.

    Headline rates pool held-out observations over all successful repeats;
    per-repeat IRDs drop groups that received no held-out rows.
    """
    if method not in ("lr", "org"):
        raise ValueError("method must be 'lr' or 'org'")
    if not 0.0 < holdout < 1.0:
        raise ValueError("holdout must lie in (0, 1)")
    if int(repeats) < 1:
        raise ValueError("repeats must be >= 1")
    pen = pen or PenaltyConfig()
    cfg = cfg or SolverConfig()
    r = spec.r_array
    T = spec.T
    # split k depends only on (seed, k) applied to the canonical row order
    order = np.lexsort(data.features.T[::-1])
    canon = data.subset(order)

    records = []
    tot_counts = np.zeros(T, dtype=int)
    tot_pos = np.zeros(T, dtype=int)
    for k in range(int(repeats)):
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, k])
        tr, te = _split(rng, canon.labels, holdout)
        train = canon.subset(tr)
        try:
            beta, tau = _fit_tau(train, spec, method, pen, replace(cfg, seed=int(rng.integers(2**63))))
        except _RepeatFailed as exc:
            records.append(CvRepeat(k, False, str(exc)))
            continue
        except (OrdinalRiskError, ValueError, np.linalg.LinAlgError) as exc:
            records.append(CvRepeat(k, False, getattr(exc, "code", type(exc).__name__)))
            continue
        scores = canon.features[te] @ beta
        er = empirical_interval_risk(scores, canon.labels[te], tau)
        sq, eu, excl = _ird_defined(er.rates, r)
        tot_counts += er.counts
        tot_pos += er.positives
        records.append(CvRepeat(k, True, "", tuple(er.rates.tolist()), tuple(er.counts.tolist()), sq, eu, excl))

    with np.errstate(invalid="ignore", divide="ignore"):
        pooled = np.where(tot_counts > 0, tot_pos / np.maximum(tot_counts, 1), np.nan)
    psq, peu, _ = _ird_defined(pooled, r)
    good = [rec for rec in records if rec.ok]
    sqs = np.array([rec.ird_squared for rec in good])
    eus = np.array([rec.ird_euclidean for rec in good])

    def _ms(a):
        if a.size == 0:
            return math.nan, math.nan
        return float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0

    msq, ssq = _ms(sqs)
    meu, seu = _ms(eus)
    if not good:
        psq = peu = math.nan
    return CvReport(method, spec.r, tuple(records), tuple(pooled.tolist()), tuple(tot_counts.tolist()),
                    psq, peu, msq, ssq, meu, seu, len(records) - len(good),
                    {"holdout": holdout, "repeats": int(repeats), "seed": int(seed), "method": method,
                     "n_starts": cfg.n_starts, "gamma": pen.gamma, "covariance": cfg.covariance})
