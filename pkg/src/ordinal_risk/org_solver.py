"""Constrained, penalized maximum-likelihood fit of an ordinal risk-group (ORG)
logistic model.

The search maximizes ``l_LR(beta) - gamma * Pen(tau(beta))`` over coefficient
vectors whose estimated IRD is below ``epsilon``. Each start runs a Nelder-Mead
search on a merit function with an escalating quadratic penalty on the IRD
excess, then projects onto the zero-IRD set and polishes there.

The projection uses a structural fact of the equal-variance Gaussian model:
interval risks depend on beta only through the standardized separation
``delta(beta) = beta'(mu1 - mu0) / sqrt(beta' S beta)``, so the zero-IRD
coefficient vectors are exactly the level sets ``delta(beta) = delta*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data_model import Breakpoints, Dataset, GaussianEstimates, RiskSpec, estimate_gaussian, project, separation
from .errors import (
    DegenerateProjectionError,
    DegenerateTargetError,
    InfeasibleBreakpointsError,
    NoRootError,
    OrdinalRiskError,
    PenaltyUndefinedError,
)
from .logistic import fit_lr, log_likelihood
from .risk_core import (
    BreakpointSolution,
    Infeasibility,
    RiskAssessment,
    fit_breakpoints,
    ird,
    _log_cdf,
    solve_breakpoints,
    zero_ird_separations,
)
from .special_math import ToleranceConfig, find_root_monotone, minimize_simplex


@dataclass(frozen=True)
class PenaltyConfig:
    gamma: float = 0.0
    form: str = "max_gap_ratio"

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("gamma must be >= 0")
        if self.form != "max_gap_ratio":
            raise ValueError(f"unknown penalty form {self.form!r}")


@dataclass(frozen=True)
class SolverConfig:
    n_starts: int = 200
    seed: int = 0
    epsilon: float = 1e-7
    min_gap: float = 1e-4
    inner: ToleranceConfig = field(default_factory=lambda: ToleranceConfig(abs_tol=1e-13, max_iter=300))
    outer: ToleranceConfig = field(default_factory=lambda: ToleranceConfig(abs_tol=1e-7, max_iter=3000))
    penalty_schedule: tuple = (1e2, 1e4, 1e6)
    penalty_iter: int = 300
    infeasible_surrogate_scale: float = 1e6
    covariance: str = "pooled"

    def __post_init__(self):
        if int(self.n_starts) < 1:
            raise ValueError("n_starts must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.min_gap >= 0:
            raise ValueError("min_gap must be >= 0")
        if not self.infeasible_surrogate_scale > 0:
            raise ValueError("infeasible_surrogate_scale must be > 0")


@dataclass(frozen=True)
class OrgSolution:
    beta: np.ndarray
    tau: Breakpoints | None
    assessment: RiskAssessment | None
    log_likelihood: float
    penalty_value: float
    objective: float
    feasible: bool
    degenerate: bool
    start_index: int
    infeasibility: Infeasibility | None = None


@dataclass(frozen=True)
class StartSummary:
    start_index: int
    objective: float
    log_likelihood: float
    ird: float
    feasible: bool
    degenerate: bool
    n_eval: int


@dataclass(frozen=True)
class OrgResult:
    best: OrgSolution
    starts: tuple
    lr_beta: np.ndarray
    target_separations: tuple

    @property
    def feasible(self) -> bool:
        return self.best.feasible and not self.best.degenerate


def penalty(beta, tau: Breakpoints, est: GaussianEstimates) -> float:
    """(max interior gap / beta'(mu1 - mu0) - 1)^2; invariant under (beta, tau) -> (c beta, c tau)."""
    if tau.T < 3:
        raise PenaltyUndefinedError("penalty needs at least two interior breakpoints (T >= 3)")
    beta = np.asarray(beta, dtype=float)
    spread = float(beta @ est.delta_mu)
    # relative test: an orthogonal beta leaves rounding residue in the dot product
    if abs(spread) <= 1e-14 * float(np.linalg.norm(beta) * np.linalg.norm(est.delta_mu)):
        raise PenaltyUndefinedError("projected class means coincide")
    return (float(np.max(tau.gaps)) / spread - 1.0) ** 2


@dataclass(frozen=True)
class ConstraintEvaluation:
    assessment: RiskAssessment | None
    breakpoints: Breakpoints | None
    infeasibility: Infeasibility | None

    @property
    def ird(self) -> float:
        return self.assessment.ird if self.assessment is not None else math.inf


def ird_constraint(beta, est: GaussianEstimates, spec: RiskSpec, cfg: ToleranceConfig | None = None,
                   method: str = "min_ird") -> ConstraintEvaluation:
    """Estimated IRD of beta at its breakpoints tau(beta).

    ``method="min_ird"`` uses the IRD-minimizing breakpoints (these coincide
    with the exact partition whenever one exists); ``"sequential"`` uses the
    sequential exact match and reports an infeasibility record when some level
    is unreachable.
    """
    g = project(est, beta)
    try:
        sol = fit_breakpoints(g, spec, cfg) if method == "min_ird" else solve_breakpoints(g, spec, cfg)
    except InfeasibleBreakpointsError as exc:
        return ConstraintEvaluation(None, None, exc.record)
    return ConstraintEvaluation(sol.assessment, sol.breakpoints, None)


# -- internals -----------------------------------------------------------------

class _Problem:
    def __init__(self, data: Dataset, est: GaussianEstimates, spec: RiskSpec, pen: PenaltyConfig,
                 cfg: SolverConfig, targets):
        self.data, self.est, self.spec, self.pen, self.cfg = data, est, spec, pen, cfg
        self.targets = np.asarray(targets, dtype=float)
        w = est._sigma_pinv @ est.delta_mu
        self.direction = w / np.linalg.norm(w) if np.any(w) else None
        self.use_penalty = spec.T >= 3 and pen.gamma > 0

    def penalty_of(self, beta, bp: Breakpoints) -> float:
        if not self.use_penalty:
            return 0.0
        return penalty(beta, bp, self.est)

    def sequential(self, beta) -> BreakpointSolution:
        return solve_breakpoints(project(self.est, beta), self.spec, self.cfg.inner)

    def merit(self, beta, rho: float) -> float:
        """Penalized objective to maximize; finite everywhere."""
        scale = self.cfg.infeasible_surrogate_scale
        try:
            sol = self.sequential(beta)
        except InfeasibleBreakpointsError as exc:
            return -scale * (1.0 + exc.record.ird_lower_bound)
        except (OrdinalRiskError, ValueError):
            return -scale * 2.0
        try:
            pv = self.penalty_of(beta, sol.breakpoints)
        except PenaltyUndefinedError:
            return -scale * 2.0
        excess = max(0.0, sol.assessment.ird - self.cfg.epsilon)
        return log_likelihood(beta, self.data) - self.pen.gamma * pv - rho * excess * excess

    def project_feasible(self, beta):
        """Move beta along the max-separation direction until delta(beta) hits
        the nearest zero-IRD separation. Returns None if that fails."""
        if self.direction is None or self.targets.size == 0:
            return None
        try:
            d0 = separation(self.est, beta)
        except DegenerateProjectionError:
            return None
        target = float(self.targets[np.argmin(np.abs(self.targets - d0))])
        scale = float(np.linalg.norm(beta)) or 1.0
        w = self.direction * scale

        def f(s):
            try:
                return separation(self.est, beta + s * w) - target
            except DegenerateProjectionError:
                return -target
        if f(0.0) == 0.0:
            return np.array(beta, dtype=float)
        sign = 1.0 if d0 < target else -1.0
        s = 0.5
        while sign * f(sign * s) < 0:
            s *= 2.0
            if s > 1e8:
                return None
        lo, hi = sorted((0.0, sign * s))
        try:
            root = find_root_monotone(f, lo, hi, ToleranceConfig(abs_tol=1e-15, max_iter=300))
        except (NoRootError, OrdinalRiskError):
            return None
        return beta + root * w

    def polish_value(self, beta) -> float:
        b = self.project_feasible(beta)
        if b is None:
            return self.cfg.infeasible_surrogate_scale * 3.0
        try:
            sol = self.sequential(b)
            pv = self.penalty_of(b, sol.breakpoints)
        except (OrdinalRiskError, ValueError):
            return self.cfg.infeasible_surrogate_scale * 3.0
        return -(log_likelihood(b, self.data) - self.pen.gamma * pv)

    def finalize(self, beta, start_index: int) -> OrgSolution:
        beta = np.asarray(beta, dtype=float)
        ll = log_likelihood(beta, self.data)
        try:
            g = project(self.est, beta)
        except DegenerateProjectionError:
            return OrgSolution(beta, None, None, ll, math.nan, -math.inf, False, True, start_index)
        infeas = None
        sol = None
        try:
            sol = solve_breakpoints(g, self.spec, self.cfg.inner)
        except InfeasibleBreakpointsError as exc:
            infeas = exc.record
        except OrdinalRiskError:
            pass
        if sol is None or sol.assessment.ird >= self.cfg.epsilon:
            try:
                alt = fit_breakpoints(g, self.spec, self.cfg.inner)
                if sol is None or alt.assessment.ird < sol.assessment.ird:
                    sol = alt
            except OrdinalRiskError:
                pass
        if sol is None:
            return OrgSolution(beta, None, None, ll, math.nan, -math.inf, False, True, start_index, infeas)
        bp, a = sol.breakpoints, sol.assessment
        try:
            pv = self.penalty_of(beta, bp)
        except PenaltyUndefinedError:
            pv = math.inf
        gaps = bp.gaps
        degenerate = bool(gaps.size and float(np.min(gaps)) < self.cfg.min_gap)
        objective = ll - self.pen.gamma * pv if self.use_penalty else ll
        return OrgSolution(beta, bp, a, ll, pv, objective, bool(a.ird < self.cfg.epsilon), degenerate,
                           start_index, infeas)


def generate_starts(beta_lr, n_starts: int, seed: int) -> list[np.ndarray]:
    """Start 0 is beta_LR itself; the rest cycle through Gaussian perturbations at
    three relative magnitudes and random directions at random scales. Start k
    draws from its own stream seeded by (seed, k)."""
    beta_lr = np.asarray(beta_lr, dtype=float)
    norm = float(np.linalg.norm(beta_lr)) or 1.0
    starts = [beta_lr.copy()]
    mags = (0.1, 0.5, 2.0)
    for k in range(1, int(n_starts)):
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, k])
        kind = (k - 1) % 4
        if kind < 3:
            sd = mags[kind] * (np.abs(beta_lr) + 0.1 * norm / math.sqrt(beta_lr.size))
            starts.append(beta_lr + rng.normal(0.0, 1.0, beta_lr.size) * sd)
        else:
            v = rng.normal(size=beta_lr.size)
            v /= np.linalg.norm(v)
            starts.append(v * norm * 10.0 ** rng.uniform(-1.5, 0.5))
    return starts


def _run_start(problem: _Problem, b0, k: int):
    cfg = problem.cfg
    n_eval = 0
    b = np.asarray(b0, dtype=float)
    round_cfg = ToleranceConfig(abs_tol=cfg.outer.abs_tol, max_iter=cfg.penalty_iter)
    for rho in cfg.penalty_schedule:
        res = minimize_simplex(lambda v: -problem.merit(v, rho), b, round_cfg)
        n_eval += res.n_eval
        b = res.x
        sol = problem.finalize(b, k)
        if sol.feasible:
            break
    if problem.targets.size:
        res = minimize_simplex(problem.polish_value, b, cfg.outer, ftol=1e-10)
        n_eval += res.n_eval
        projected = problem.project_feasible(res.x)
        if projected is not None:
            cand = problem.finalize(projected, k)
            incumbent = problem.finalize(b, k)
            if _better(cand, incumbent):
                return cand, n_eval
            return incumbent, n_eval
    return problem.finalize(b, k), n_eval


def _rank_key(sol: OrgSolution):
    ok = sol.feasible and not sol.degenerate
    ird_val = sol.assessment.ird if sol.assessment is not None else math.inf
    # feasible non-degenerate by objective, then everything else by IRD
    return (0, -sol.objective, sol.start_index) if ok else (1, ird_val, sol.start_index)


def _better(a: OrgSolution, b: OrgSolution) -> bool:
    return _rank_key(a) < _rank_key(b)


def fit_org(data: Dataset, spec: RiskSpec, pen: PenaltyConfig | None = None, cfg: SolverConfig | None = None,
            est: GaussianEstimates | None = None, beta_lr=None) -> OrgResult:
    """Multi-start ORG fit. Returns the best feasible, non-degenerate solution,
    or the lowest-IRD candidate flagged infeasible/degenerate if none is found.
    Fully determined by ``cfg.seed``."""
    pen = pen or PenaltyConfig()
    cfg = cfg or SolverConfig()
    if spec.r[0] <= 0 or spec.r[-1] >= 1:
        raise DegenerateTargetError("r_1 = 0 or r_T = 1 forces infinite breakpoints")
    est = est or estimate_gaussian(data, cfg.covariance)
    if beta_lr is None:
        beta_lr = fit_lr(data).beta
    spec = RiskSpec(spec.r, cfg.epsilon, spec.norm)
    delta_max = math.sqrt(max(float(est.delta_mu @ est._sigma_pinv @ est.delta_mu), 1e-12))
    targets = zero_ird_separations(est.p_hat, spec, delta_max=delta_max)
    problem = _Problem(data, est, spec, pen, cfg, targets)

    summaries = []
    best = None
    for k, b0 in enumerate(generate_starts(beta_lr, cfg.n_starts, cfg.seed)):
        sol, n_eval = _run_start(problem, b0, k)
        summaries.append(StartSummary(k, sol.objective, sol.log_likelihood,
                                      sol.assessment.ird if sol.assessment is not None else math.inf,
                                      sol.feasible, sol.degenerate, n_eval))
        if best is None or _better(sol, best):
            best = sol
    return OrgResult(best, tuple(summaries), np.asarray(beta_lr, dtype=float), tuple(targets))


# -- degenerate-solution construction ------------------------------------------

@dataclass(frozen=True)
class DegenerateRow:
    t: float
    tau: tuple
    R: tuple
    ird: float


def degenerate_demo(mu: float, sigma: float, t_grid) -> list[DegenerateRow]:
    """Symmetric classes N(-mu, sigma^2) and N(mu, sigma^2) with p = 1/2,
    r = (0, 1/2, 1) and breakpoints (-t, t). The middle group always has risk
    exactly 1/2; the outer groups approach 0 and 1 only as t grows."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    r = (0.0, 0.5, 1.0)
    rows = []
    for t in t_grid:
        t = float(t)
        # R1 = [1 + Phi((-t+mu)/s) / Phi((-t-mu)/s)]^-1, computed in log space
        ratio = math.exp(_log_cdf((-t + mu) / sigma) - _log_cdf((-t - mu) / sigma))
        R1 = 1.0 / (1.0 + ratio)
        R = (R1, 0.5, 1.0 - R1)
        rows.append(DegenerateRow(t, (-t, t), R, ird(R, r, "euclidean")))
    return rows
