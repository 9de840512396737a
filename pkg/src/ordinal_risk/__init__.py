"""Ordinal risk groups from a logistic score: interval risks, breakpoint
solving, constrained ORG fitting and cross-validation."""

from .data_model import Breakpoints, Dataset, GaussianEstimates, ProjectedGaussian, RiskSpec, estimate_gaussian, project
from .empirical import CvReport, cross_validate, empirical_class_cdf, empirical_interval_risk, simulate_gaussian_pair
from .errors import OrdinalRiskError
from .logistic import LogisticFit, fit_lr
from .org_solver import OrgResult, OrgSolution, PenaltyConfig, SolverConfig, degenerate_demo, fit_org, penalty
from .risk_core import (
    assess,
    conditional_risk,
    feasibility_bounds,
    fit_breakpoints,
    interval_odds,
    ird,
    left_ray_risk,
    q_to_r,
    r_to_q,
    solve_breakpoints,
)
from .special_math import ToleranceConfig

__version__ = "0.1.0"
