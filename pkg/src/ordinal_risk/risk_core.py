"""Interval odds, interval risks, IRD, breakpoint solving and the likelihood-ratio
diagnostics for equal-variance projected Gaussians.

All interval probabilities are handled as log masses so that tail intervals and
near-empty intervals keep full relative precision. Intervals are right-closed,
``(tau_{i-1}, tau_i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special as _sp

from .data_model import Breakpoints, ProjectedGaussian, RiskSpec
from .errors import (
    DegenerateTargetError,
    DomainError,
    InfeasibleBreakpointsError,
    NoRootError,
    VanishingIntervalError,
)
from .special_math import (
    ToleranceConfig,
    find_root_monotone,
    logistic,
    minimize_simplex,
    std_normal_cdf,
)

_LOG_TINY_MASS = math.log(1e-300)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_NARROW = 1e-3
_ROOT_CFG = ToleranceConfig(abs_tol=1e-13, rel_tol=4 * np.finfo(float).eps, max_iter=300)


# -- log-space normal masses -------------------------------------------------

def _log_cdf(z: float) -> float:
    if z == -math.inf:
        return -math.inf
    if z == math.inf:
        return 0.0
    if z > -30.0:
        return math.log(0.5 * math.erfc(-z / _SQRT2))
    return math.log(0.5 * float(_sp.erfcx(-z / _SQRT2))) - 0.5 * z * z


def _log_mass(a: float, b: float) -> float:
    """log(Phi(b) - Phi(a)) for a < b in standard units."""
    if a == -math.inf:
        return _log_cdf(b)
    if b == math.inf:
        return _log_cdf(-a)
    h = b - a
    if h < _NARROW:
        m = 0.5 * (a + b)
        # midpoint rule with the phi'' correction: error O(h^5)
        return -0.5 * m * m - _HALF_LOG_2PI + math.log(h) + math.log1p((m * m - 1.0) * h * h / 24.0)
    if a + b > 0:
        a, b = -b, -a
    la, lb = _log_cdf(a), _log_cdf(b)
    return lb + math.log1p(-math.exp(la - lb))


def _log_odds_interval(delta: float, za: float, zb: float) -> float:
    """log nu for the interval (za, zb] in class-0 standard units, class 1 shifted by delta."""
    return _log_mass(za - delta, zb - delta) - _log_mass(za, zb)


def _std_edges(g: ProjectedGaussian, tau: Breakpoints | Sequence[float]) -> list[float]:
    taus = tau.tau if isinstance(tau, Breakpoints) else tuple(float(t) for t in tau)
    return [-math.inf] + [(t - g.mu0_beta) / g.sigma_beta for t in taus] + [math.inf]


# -- interval odds and risks ---------------------------------------------------

def log_interval_odds(g: ProjectedGaussian, tau: Breakpoints | Sequence[float], check: bool = True) -> np.ndarray:
    z = _std_edges(g, tau)
    delta = g.separation
    out = np.empty(len(z) - 1)
    for i in range(len(z) - 1):
        if not z[i + 1] > z[i]:
            raise ValueError("breakpoints must be strictly increasing")
        l0 = _log_mass(z[i], z[i + 1])
        if check and l0 < _LOG_TINY_MASS:
            raise VanishingIntervalError(f"class-0 mass of interval {i + 1} is below 1e-300", interval=i + 1)
        out[i] = _log_mass(z[i] - delta, z[i + 1] - delta) - l0
    return out


def interval_odds(g: ProjectedGaussian, tau: Breakpoints | Sequence[float]) -> np.ndarray:
    """nu_i = P(score in I_i | Y=1) / P(score in I_i | Y=0) for each of the T intervals."""
    with np.errstate(over="ignore"):
        return np.exp(log_interval_odds(g, tau))


def conditional_risk(nu, p: float) -> np.ndarray:
    """R_i = (1 + (1-p)/p / nu_i)^-1, with nu=0 -> 0 and nu=inf -> 1."""
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0) or np.any(np.isnan(nu)):
        raise ValueError("interval odds must be nonnegative")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    c = (1.0 - p) / p
    with np.errstate(divide="ignore"):
        return np.where(nu == 0, 0.0, 1.0 / (1.0 + c / np.where(nu == 0, 1.0, nu)))


def _risk_from_log_odds(log_nu: np.ndarray, p: float) -> np.ndarray:
    return logistic(np.asarray(log_nu) + math.log(p / (1.0 - p)))


def ird(R, spec: RiskSpec | Sequence[float], norm: str | None = None) -> float:
    """Interval risk deviation ||R - r|| under the RiskSpec (or given) norm."""
    if isinstance(spec, RiskSpec):
        r, norm = spec.r_array, norm or spec.norm
    else:
        r, norm = np.asarray(spec, dtype=float), norm or "euclidean"
    R = np.asarray(R, dtype=float)
    if R.shape != r.shape:
        raise ValueError(f"R has length {R.size} but r has length {r.size}")
    d = R - r
    if norm == "euclidean":
        return float(math.sqrt(float(d @ d)))
    if norm == "squared_euclidean":
        return float(d @ d)
    if norm == "max_abs":
        return float(np.max(np.abs(d)))
    raise ValueError(f"unknown norm {norm!r}")


@dataclass(frozen=True)
class RiskAssessment:
    R: np.ndarray
    nu: np.ndarray
    ird: float
    feasible: bool
    norm: str = "euclidean"

    def ird_as(self, r, norm: str) -> float:
        return ird(self.R, r, norm)


def assess(g: ProjectedGaussian, tau: Breakpoints | Sequence[float], spec: RiskSpec) -> RiskAssessment:
    log_nu = log_interval_odds(g, tau)
    if log_nu.size != spec.T:
        raise ValueError(f"{log_nu.size} intervals but {spec.T} risk levels")
    R = _risk_from_log_odds(log_nu, g.p)
    with np.errstate(over="ignore"):
        nu = np.exp(log_nu)
    value = ird(R, spec)
    return RiskAssessment(R=R, nu=nu, ird=value, feasible=value < spec.epsilon, norm=spec.norm)


# -- likelihood ratio diagnostics -------------------------------------------

def log_likelihood_ratio(g: ProjectedGaussian, x: float) -> float:
    return (g.mu1_beta - g.mu0_beta) * (2.0 * x - g.mu0_beta - g.mu1_beta) / (2.0 * g.sigma_beta ** 2)


def likelihood_ratio(g: ProjectedGaussian, x: float) -> float:
    """Lambda(x) = f1(x)/f0(x) for the projected class densities."""
    try:
        return math.exp(log_likelihood_ratio(g, x))
    except OverflowError:
        return math.inf


def gamma_ratio(g: ProjectedGaussian, c: float, x: float) -> float:
    """(F1(x) - F1(c)) / (F0(x) - F0(c)); ``c`` may be -inf."""
    if not x > c:
        raise ValueError("gamma_ratio needs x > c")
    za, zb = (c - g.mu0_beta) / g.sigma_beta, (x - g.mu0_beta) / g.sigma_beta
    try:
        return math.exp(_log_odds_interval(g.separation, za, zb))
    except OverflowError:
        return math.inf


def pointwise_risk(g: ProjectedGaussian, z: float) -> float:
    """P(Y=1 | score = z) = p f1(z) / f(z): the limit of R_i over shrinking intervals at z."""
    return logistic(log_likelihood_ratio(g, z) + math.log(g.p / (1.0 - g.p)))


def left_ray_risk(mu0: float, sigma0: float, mu1: float, sigma1: float, p: float, x) -> float:
    """Q(x) = P(Y=1 | score <= x) for possibly heteroscedastic Gaussian classes."""
    if not (sigma0 > 0 and sigma1 > 0):
        raise ValueError("standard deviations must be > 0")
    if np.ndim(x):
        return np.array([left_ray_risk(mu0, sigma0, mu1, sigma1, p, v) for v in np.asarray(x, dtype=float)])
    if x == math.inf:
        return p
    l1 = math.log(p) + _log_cdf((x - mu1) / sigma1)
    l0 = math.log1p(-p) + _log_cdf((x - mu0) / sigma0)
    return logistic(l1 - l0)


# -- feasibility bounds --------------------------------------------------------

@dataclass(frozen=True)
class BoundaryCheck:
    i: int
    boundary: float
    lhs: float
    rhs: float
    lr_lhs: float
    lr_rhs: float
    satisfied: bool
    lr_satisfied: bool


@dataclass(frozen=True)
class FeasibilityReport:
    """Necessary (not sufficient) conditions for zero IRD, one per interior boundary.

    Passing every check does not guarantee that IRD = 0 is attainable; the
    direct evaluation of the interval risks is the only conclusive test.
    """

    checks: tuple
    first_violation: int | None

    @property
    def all_satisfied(self) -> bool:
        return self.first_violation is None


def feasibility_bounds(g: ProjectedGaussian, tau: Breakpoints | Sequence[float], spec: RiskSpec) -> FeasibilityReport:
    taus = tau.tau if isinstance(tau, Breakpoints) else tuple(float(t) for t in tau)
    if len(taus) != spec.T - 1:
        raise ValueError(f"expected {spec.T - 1} breakpoints, got {len(taus)}")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("breakpoints must be strictly increasing")
    p = g.p
    checks = []
    first = None
    for i in range(2, spec.T + 1):
        x = taus[i - 2]
        r_i = spec.r[i - 1]
        lhs = pointwise_risk(g, x)
        lr_lhs = likelihood_ratio(g, x)
        if r_i >= 1.0:
            lr_rhs = math.inf
        else:
            lr_rhs = (1.0 - p) / p * r_i / (1.0 - r_i)
        sat = lhs < r_i
        lr_sat = lr_lhs < lr_rhs
        checks.append(BoundaryCheck(i, x, lhs, r_i, lr_lhs, lr_rhs, sat, lr_sat))
        if first is None and not sat:
            first = i
    return FeasibilityReport(tuple(checks), first)


# -- breakpoint solving --------------------------------------------------------

@dataclass(frozen=True)
class Infeasibility:
    """Step ``step`` cannot reach ``target``: attainable R_step lies in (low, high)."""

    step: int
    target: float
    attainable_low: float
    attainable_high: float
    boundary: float

    @property
    def side(self) -> str:
        return "low" if self.target <= self.attainable_low else "high"

    @property
    def ird_lower_bound(self) -> float:
        if self.target <= self.attainable_low:
            return self.attainable_low - self.target
        return max(self.target - self.attainable_high, 0.0)


@dataclass(frozen=True)
class BreakpointSolution:
    breakpoints: Breakpoints
    assessment: RiskAssessment
    method: str = "sequential"

    @property
    def tau(self) -> tuple:
        return self.breakpoints.tau


def _check_targets(spec: RiskSpec):
    if spec.r[0] <= 0.0 or spec.r[-1] >= 1.0:
        raise DegenerateTargetError("r_1 = 0 or r_T = 1 forces infinite breakpoints")


def _solve_step(delta: float, p: float, prev: float, r_i: float, step_index: int,
                cfg: ToleranceConfig = _ROOT_CFG) -> float:
    """Find z_i > prev with R_i(prev, z_i) = r_i (standard units, class 1 shifted by delta)."""
    logit_p = math.log(p / (1.0 - p))
    target = math.log(r_i / (1.0 - r_i)) - logit_p
    # attainable log-odds range of R_i over z_i in (prev, inf)
    if prev == -math.inf:
        lo_lim = -math.inf if delta > 0 else (0.0 if delta == 0 else math.inf)
        hi_lim = 0.0
        boundary = 0.0 if delta > 0 else p
    else:
        lo_lim = delta * (2.0 * prev - delta) / 2.0
        hi_lim = _log_cdf(delta - prev) - _log_cdf(-prev)
        boundary = logistic(lo_lim + logit_p)

    def infeasible():
        low = 0.0 if lo_lim == -math.inf else logistic(lo_lim + logit_p)
        return InfeasibleBreakpointsError(Infeasibility(
            step=step_index, target=r_i, attainable_low=low,
            attainable_high=logistic(hi_lim + logit_p), boundary=boundary))

    if delta <= 0 or not lo_lim < target < hi_lim:
        raise infeasible()

    def f(t):
        return _log_odds_interval(delta, prev, t) - target

    if prev == -math.inf:
        lo = min(0.0, delta) - 1.0
        width = 1.0
        while f(lo) >= 0:
            width *= 2.0
            lo -= width
            if lo < -1e4:
                raise NoRootError(f"could not bracket breakpoint {step_index} from below")
    else:
        lo = prev + 1e-13 * (1.0 + abs(prev))
        if f(lo) >= 0:
            raise infeasible()
    hi = max(lo, delta) + 1.0
    width = 1.0
    while f(hi) <= 0:
        width *= 2.0
        hi += width
        if hi > 1e4:
            raise infeasible()
    return find_root_monotone(f, lo, hi, cfg)


def sequential_std(delta: float, p: float, r: Sequence[float], cfg: ToleranceConfig = _ROOT_CFG) -> list[float]:
    """Sequential matching in standard units (class 0 ~ N(0,1), class 1 ~ N(delta,1)).

    Returns ``z_1 < ... < z_{T-1}`` with R_i = r_i for i < T, or raises
    :class:`InfeasibleBreakpointsError` naming the first unreachable step.
    """
    z: list[float] = []
    prev = -math.inf
    for i, r_i in enumerate(r[:-1], start=1):
        prev = _solve_step(delta, p, prev, r_i, i, cfg)
        z.append(prev)
    return z


def solve_breakpoints(g: ProjectedGaussian, spec: RiskSpec, cfg: ToleranceConfig | None = None) -> BreakpointSolution:
    """Match R_i = r_i for i = 1..T-1 in turn; group T carries the residual.

    Each step is a bracketed root search, valid because R_i is strictly
    increasing in tau_i for equal-variance Gaussian scores. Raises
    :class:`InfeasibleBreakpointsError` (with the attainable range of the
    failing step) when some r_i cannot be reached.
    """
    _check_targets(spec)
    z = sequential_std(g.separation, g.p, spec.r, cfg or _ROOT_CFG)
    bp = Breakpoints(tuple(g.mu0_beta + g.sigma_beta * v for v in z))
    return BreakpointSolution(bp, assess(g, bp, spec), "sequential")


_MIN_LOG_GAP = math.log(1e-11)


def _min_ird_std(delta: float, p: float, r: np.ndarray, starts: list[np.ndarray], norm: str):
    logit_p = math.log(p / (1.0 - p))
    T = r.size
    obj_norm = "squared_euclidean" if norm in ("euclidean", "squared_euclidean") else norm

    def unpack(v):
        z = [v[0]]
        for u in v[1:]:
            z.append(z[-1] + math.exp(max(u, _MIN_LOG_GAP)))
        return z

    def objective(v):
        if abs(v[0]) > 60:
            return 10.0 + abs(v[0])
        z = [-math.inf] + unpack(v) + [math.inf]
        R = np.array([_log_odds_interval(delta, z[i], z[i + 1]) for i in range(T)])
        return ird(logistic(R + logit_p), r, obj_norm)

    best = None
    cfg = ToleranceConfig(abs_tol=1e-11, max_iter=6000)
    for v0 in starts:
        res = minimize_simplex(objective, v0, cfg, step=np.full(v0.size, 0.25))
        res = minimize_simplex(objective, res.x, cfg, step=np.full(v0.size, 0.01))
        if best is None or res.fun < best.fun:
            best = res
    return unpack(best.x)


def _to_free(z: Sequence[float]) -> np.ndarray:
    gaps = np.maximum(np.diff(z), 1e-11)
    return np.concatenate([[z[0]], np.log(gaps)])


def fit_breakpoints(g: ProjectedGaussian, spec: RiskSpec, cfg: ToleranceConfig | None = None) -> BreakpointSolution:
    """Breakpoints minimizing IRD over all strictly increasing tau.

    When an exact (IRD = 0) partition exists it is unique and equals the
    sequential solution. Otherwise the deviation is spread over all T groups;
    for unreachable middle levels the minimizer collapses an interval (a
    degenerate solution, reported with its tiny gap).
    """
    _check_targets(spec)
    delta, p, r = g.separation, g.p, spec.r_array
    if delta <= 0:
        raise InfeasibleBreakpointsError(Infeasibility(1, spec.r[0], p, p, p))
    starts = []
    seq = None
    try:
        z = sequential_std(delta, p, spec.r, cfg or _ROOT_CFG)
        seq = Breakpoints(tuple(g.mu0_beta + g.sigma_beta * v for v in z))
        starts.append(_to_free(z))
    except InfeasibleBreakpointsError:
        z = _partial_sequential(delta, p, spec.r)
        starts.append(_to_free(z))
    # quantile-spread start from the mixture distribution
    mix = np.linspace(-3.0, 3.0 + delta, spec.T + 1)[1:-1]
    starts.append(_to_free(mix))
    if seq is not None:
        sol = BreakpointSolution(seq, assess(g, seq, spec), "sequential")
        if sol.assessment.ird <= 1e-14:
            return sol
    z = _min_ird_std(delta, p, r, starts, spec.norm)
    bp = Breakpoints(tuple(g.mu0_beta + g.sigma_beta * v for v in z))
    out = BreakpointSolution(bp, assess(g, bp, spec), "min_ird")
    if seq is not None and sol.assessment.ird <= out.assessment.ird:
        return sol
    return out


def _partial_sequential(delta, p, r):
    """Sequential solve that, at an unreachable step, collapses the interval
    (target below reach) or pushes the breakpoint far right (target above reach)."""
    z: list[float] = []
    prev = -math.inf
    for i, r_i in enumerate(r[:-1], start=1):
        try:
            nxt = _solve_step(delta, p, prev, r_i, i)
        except (InfeasibleBreakpointsError, NoRootError) as exc:
            rec = getattr(exc, "record", None)
            base = min(0.0, delta) - 8.0 if prev == -math.inf else prev
            if rec is not None and rec.side == "low" and prev != -math.inf:
                nxt = base + 1e-9
            else:
                nxt = base + 8.0
        z.append(nxt)
        prev = nxt
    return z


# -- zero-IRD separations -------------------------------------------------------

def _sequential_residual(delta, p, r, norm):
    z = sequential_std(delta, p, r)
    edges = [-math.inf] + z + [math.inf]
    last = _log_odds_interval(delta, edges[-2], edges[-1])
    return logistic(last + math.log(p / (1.0 - p))) - r[-1]


def zero_ird_separations(p: float, spec: RiskSpec, delta_max: float = 12.0, grid: int = 600) -> list[float]:
    """Standardized separations delta at which the sequential partition also
    matches r_T, i.e. where IRD = 0 is attainable.

    For equal-variance Gaussian scores the interval risks depend on the model
    only through delta = (mu1 - mu0)/sigma, so the zero-IRD coefficient vectors
    are exactly the level sets {beta : delta(beta) = delta*}.
    """
    _check_targets(spec)
    ds = np.geomspace(1e-3, delta_max, grid)
    vals = []
    for d in ds:
        try:
            vals.append(_sequential_residual(d, p, spec.r, spec.norm))
        except (InfeasibleBreakpointsError, NoRootError):
            vals.append(None)
    roots = []
    for k in range(grid - 1):
        a, b = vals[k], vals[k + 1]
        if a is None or b is None:
            continue
        if a == 0:
            roots.append(float(ds[k]))
        elif a * b < 0:
            f = lambda d: _sequential_residual(d, p, spec.r, spec.norm)
            roots.append(find_root_monotone(f, ds[k], ds[k + 1], ToleranceConfig(abs_tol=1e-15, max_iter=300)))
    return roots


# -- r <-> q translations -----------------------------------------------------

def _check_masses(masses):
    m = np.asarray(masses, dtype=float)
    if np.any(m < 0):
        raise ValueError("interval masses must be nonnegative")
    if abs(m.sum() - 1.0) > 1e-9:
        raise ValueError("interval masses must sum to 1")
    return m


def r_to_q(r, masses) -> np.ndarray:
    """Risk over adjacent intervals -> risk over left rays: q_i = sum_{j<=i} r_j m_j / sum_{j<=i} m_j."""
    r = np.asarray(r, dtype=float)
    m = _check_masses(masses)
    cum = np.cumsum(m)
    if np.any(cum <= 0):
        raise DomainError("zero cumulative mass; left-ray risk undefined")
    return np.cumsum(r * m) / cum


def q_to_r(q, masses) -> np.ndarray:
    """Inverse of :func:`r_to_q`: r_i = (C_i q_i - C_{i-1} q_{i-1}) / m_i."""
    q = np.asarray(q, dtype=float)
    m = _check_masses(masses)
    cum = np.cumsum(m)
    if np.any(cum <= 0) or np.any(m <= 0):
        raise DomainError("zero interval mass; interval risk undefined")
    weighted = cum * q
    return np.diff(np.concatenate([[0.0], weighted])) / m


R_to_Q = r_to_q


def interval_masses(g: ProjectedGaussian, tau: Breakpoints | Sequence[float]) -> np.ndarray:
    """P(score in I_j) under the two-class mixture."""
    z = _std_edges(g, tau)
    d = g.separation
    out = []
    for a, b in zip(z[:-1], z[1:]):
        out.append(g.p * math.exp(_log_mass(a - d, b - d)) + (1 - g.p) * math.exp(_log_mass(a, b)))
    return np.array(out)


def mixture_cdf(g: ProjectedGaussian, x: float) -> float:
    return g.p * std_normal_cdf((x - g.mu1_beta) / g.sigma_beta) + (1 - g.p) * std_normal_cdf((x - g.mu0_beta) / g.sigma_beta)
