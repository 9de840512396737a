"""Numerical primitives: logistic/logit, standard normal functions, a safeguarded
bracketing root finder and a Nelder-Mead simplex minimizer."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError, NoRootError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ToleranceConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 4 * np.finfo(float).eps
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if not self.rel_tol >= 0:
            raise ValueError("rel_tol must be >= 0")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")


def logistic(s):
    """e^s / (1 + e^s) without overflow for large |s|. Accepts scalars or arrays."""
    if np.ndim(s) == 0:
        s = float(s)
        if s >= 0:
            return 1.0 / (1.0 + math.exp(-s))
        e = math.exp(s)
        return e / (1.0 + e)
    return _sp.expit(np.asarray(s, dtype=float))


def logit(p):
    if np.ndim(p) == 0:
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"logit undefined at p={p!r}; breakpoint not attainable on the probability scale")
        return math.log(p) - math.log1p(-p)
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("logit undefined outside (0, 1)")
    return np.log(p) - np.log1p(-p)


def std_normal_pdf(x):
    if np.ndim(x) == 0:
        x = float(x)
        return _INV_SQRT_2PI * math.exp(-0.5 * x * x)
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def std_normal_cdf(x):
    # erfc keeps full relative accuracy in the lower tail; Phi(x) = erfc(-x/sqrt2)/2
    if np.ndim(x) == 0:
        x = float(x)
        if x == -math.inf:
            return 0.0
        if x == math.inf:
            return 1.0
        return 0.5 * math.erfc(-x / _SQRT2)
    return 0.5 * _sp.erfc(-np.asarray(x, dtype=float) / _SQRT2)


def std_normal_sf(x):
    """Upper tail 1 - Phi(x), accurate for large positive x."""
    return std_normal_cdf(-x) if np.ndim(x) == 0 else std_normal_cdf(-np.asarray(x, dtype=float))


def std_normal_logcdf(x):
    return float(_sp.log_ndtr(x)) if np.ndim(x) == 0 else _sp.log_ndtr(np.asarray(x, dtype=float))


def find_root_monotone(f, lo, hi, cfg: ToleranceConfig | None = None):
    """Brent's method on a sign-changing bracket ``[lo, hi]``.

    Falls back to bisection whenever the interpolation step would leave the
    bracket or shrink too slowly, so convergence is guaranteed for continuous f.
    Raises :class:`NoRootError` when there is no sign change.
    """
    cfg = cfg or ToleranceConfig()
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if abs(fa) <= cfg.abs_tol and (fa == 0 or abs(fb) > abs(fa)):
        return a
    if abs(fb) <= cfg.abs_tol:
        return b
    if math.isnan(fa) or math.isnan(fb):
        raise NoRootError(f"objective is NaN at bracket end ({a}, {b})")
    if fa * fb > 0:
        raise NoRootError(f"no sign change on [{a}, {b}]: f={fa:.3g}, {fb:.3g}")

    # scipy-style brentq bookkeeping: b is the current best, c the contrapoint
    c, fc = a, fa
    d = e = b - a
    for _ in range(int(cfg.max_iter)):
        if fb * fc > 0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * cfg.rel_tol * abs(b) + 0.5 * cfg.abs_tol
        m = 0.5 * (c - b)
        if fb == 0 or abs(m) <= tol or abs(fb) <= cfg.abs_tol:
            return b
        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                qq = fa / fc
                r = fb / fc
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0))
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b += d if abs(d) > tol else math.copysign(tol, m)
        fb = f(b)
    raise ConvergenceError(f"root finder exceeded {cfg.max_iter} iterations", bracket=(min(b, c), max(b, c)))


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    converged: bool
    n_iter: int
    n_eval: int


def minimize_simplex(f, x0, cfg: ToleranceConfig | None = None, step=None, ftol=None) -> SimplexResult:
    """Nelder-Mead minimization (standard coefficients 1, 2, 1/2, 1/2).

    Converges when the simplex diameter (max distance from the best vertex)
    drops to ``cfg.abs_tol``, or, if ``ftol`` is given, when in addition the
    spread of function values is below ``ftol`` and the diameter is below
    ``sqrt(cfg.abs_tol)``. The initial simplex perturbs each coordinate by
    ``step`` (default 5% of |x_i|, or 2.5e-4 for zero entries). Deterministic.
    """
    cfg = cfg or ToleranceConfig(abs_tol=1e-8, max_iter=5000)
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    if step is None:
        step = np.where(x0 != 0, 0.05 * np.abs(x0), 2.5e-4)
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))

    sim = np.empty((n + 1, n))
    sim[0] = x0
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += step[i]
    fs = np.array([f(v) for v in sim], dtype=float)
    n_eval = n + 1
    loose = math.sqrt(cfg.abs_tol)

    it = 0
    converged = False
    while it < cfg.max_iter:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        diam = np.max(np.abs(sim[1:] - sim[0])) if n else 0.0
        if diam <= cfg.abs_tol or (ftol is not None and fs[-1] - fs[0] <= ftol and diam <= loose):
            converged = True
            break
        it += 1
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + (centroid - sim[-1])
        fr = f(xr)
        n_eval += 1
        if fr < fs[0]:
            xe = centroid + 2.0 * (centroid - sim[-1])
            fe = f(xe)
            n_eval += 1
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (sim[-1] - centroid)
            fc = f(xc)
            n_eval += 1
            if fc < min(fr, fs[-1]):
                sim[-1], fs[-1] = xc, fc
            else:
                sim[1:] = sim[0] + 0.5 * (sim[1:] - sim[0])
                fs[1:] = [f(v) for v in sim[1:]]
                n_eval += n
    order = np.argsort(fs, kind="stable")
    return SimplexResult(x=sim[order[0]].copy(), fun=float(fs[order[0]]), converged=converged,
                         n_iter=it, n_eval=n_eval)
