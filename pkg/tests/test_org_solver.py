import math

import numpy as np
import pytest

from ordinal_risk.data_model import Breakpoints, Dataset, RiskSpec, estimate_gaussian
from ordinal_risk.errors import DegenerateTargetError, PenaltyUndefinedError
from ordinal_risk.logistic import fit_lr, log_likelihood
from ordinal_risk.org_solver import (
    PenaltyConfig,
    SolverConfig,
    degenerate_demo,
    fit_org,
    generate_starts,
    ird_constraint,
    penalty,
)
from ordinal_risk.special_math import std_normal_cdf


def gaussian_data(seed=0, n=400, shift=1.2):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.4).astype(int)
    X = rng.normal(size=(n, 2)) + y[:, None] * np.array([shift, 0.5 * shift])
    return Dataset(np.column_stack([np.ones(n), X]), y)


class TestConfigs:
    def test_penalty_config(self):
        with pytest.raises(ValueError):
            PenaltyConfig(-1.0)
        with pytest.raises(ValueError):
            PenaltyConfig(1.0, form="other")

    @pytest.mark.parametrize("kw", [{"n_starts": 0}, {"epsilon": 0}, {"min_gap": -1},
                                    {"infeasible_surrogate_scale": 0}])
    def test_solver_config(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)


class TestPenalty:
    def _est(self):
        return estimate_gaussian(gaussian_data())

    def test_matched_scale(self):
        est = self._est()
        beta = np.array([0.0, 1.0, 0.0])
        d = float(beta @ est.delta_mu)
        assert penalty(beta, Breakpoints((0.0, d)), est) == pytest.approx(0.0, abs=1e-15)
        assert penalty(beta, Breakpoints((0.0, 2 * d)), est) == pytest.approx(1.0, abs=1e-14)

    def test_scale_invariant(self):
        est = self._est()
        beta, tau = np.array([0.2, 1.0, -0.4]), Breakpoints((-1.0, 0.3, 2.0))
        assert penalty(3.5 * beta, tau.scaled(3.5), est) == pytest.approx(penalty(beta, tau, est), rel=1e-12)

    def test_undefined(self):
        est = self._est()
        with pytest.raises(PenaltyUndefinedError):
            penalty(np.array([0.0, 1.0, 0.0]), Breakpoints((0.0,)), est)
        # a direction orthogonal to the mean gap
        dm = est.delta_mu
        beta = np.array([0.0, dm[2], -dm[1]])
        with pytest.raises(PenaltyUndefinedError):
            penalty(beta, Breakpoints((0.0, 1.0)), est)


class TestIrdConstraint:
    def test_exact_partition(self):
        d = gaussian_data()
        est = estimate_gaussian(d)
        beta = fit_lr(d).beta
        from ordinal_risk.data_model import project
        from ordinal_risk.risk_core import zero_ird_separations
        from ordinal_risk.org_solver import _Problem
        spec = RiskSpec((0.2, 0.5, 0.8))
        targets = zero_ird_separations(est.p_hat, spec)
        prob = _Problem(d, est, spec, PenaltyConfig(), SolverConfig(), targets)
        b = prob.project_feasible(beta)
        ev = ird_constraint(b, est, spec)
        assert ev.ird < 1e-9 and ev.infeasibility is None

    def test_infeasible_record(self):
        d = gaussian_data(shift=0.05)
        est = estimate_gaussian(d)
        ev = ird_constraint(fit_lr(d).beta, est, RiskSpec((0.05, 0.5, 0.95)), method="sequential")
        assert ev.infeasibility is not None and math.isinf(ev.ird)


class TestFitOrg:
    def test_feasible_and_consistent(self):
        d = gaussian_data()
        spec = RiskSpec((0.2, 0.5, 0.8))
        res = fit_org(d, spec, PenaltyConfig(10.0), SolverConfig(n_starts=3, seed=4))
        b = res.best
        assert res.feasible
        # re-verify independently of the solver's bookkeeping
        ev = ird_constraint(b.beta, estimate_gaussian(d), spec)
        assert ev.ird < 1e-7
        assert b.log_likelihood == pytest.approx(log_likelihood(b.beta, d), abs=1e-12)
        assert b.objective == pytest.approx(b.log_likelihood - 10.0 * b.penalty_value, abs=1e-10)
        assert np.all(np.diff(b.tau.tau) > 0)

    def test_deterministic(self):
        d = gaussian_data()
        spec = RiskSpec((0.2, 0.5, 0.8))
        cfg = SolverConfig(n_starts=3, seed=9)
        a = fit_org(d, spec, PenaltyConfig(10.0), cfg)
        b = fit_org(d, spec, PenaltyConfig(10.0), cfg)
        assert a.starts == b.starts
        assert a.best.beta.tobytes() == b.best.beta.tobytes()

    def test_gamma_zero_lr_feasible(self):
        # build targets that the LR fit meets exactly
        d = gaussian_data(2)
        est = estimate_gaussian(d)
        lr = fit_lr(d)
        from ordinal_risk.data_model import project
        from ordinal_risk.risk_core import assess
        g = project(est, lr.beta)
        R = assess(g, (g.mu0_beta + 0.2, g.mu1_beta), RiskSpec((0.1, 0.5, 0.9))).R
        spec = RiskSpec(tuple(R))
        res = fit_org(d, spec, PenaltyConfig(0.0), SolverConfig(n_starts=2))
        assert res.feasible
        assert res.best.objective == pytest.approx(lr.log_likelihood, abs=1e-6)

    def test_degenerate_targets_rejected(self):
        with pytest.raises(DegenerateTargetError):
            fit_org(gaussian_data(), RiskSpec((0.0, 0.5, 0.9)), cfg=SolverConfig(n_starts=1))

    def test_unreachable_flagged(self):
        # nearly uninformative features cannot reach extreme targets at any scale
        d = gaussian_data(shift=0.05)
        res = fit_org(d, RiskSpec((0.01, 0.5, 0.99)), PenaltyConfig(1.0), SolverConfig(n_starts=2))
        assert not res.feasible
        assert res.target_separations == ()

    def test_not_ray_constant(self):
        d = gaussian_data()
        rng = np.random.default_rng(0)
        for _ in range(10):
            b = rng.normal(size=3)
            assert log_likelihood(b, d) != log_likelihood(2 * b, d)


def test_starts():
    beta = np.array([1.0, -2.0, 0.5])
    s = generate_starts(beta, 9, 5)
    assert len(s) == 9 and np.array_equal(s[0], beta)
    again = generate_starts(beta, 9, 5)
    assert all(np.array_equal(a, b) for a, b in zip(s, again))
    # start k does not depend on how many starts are drawn
    assert np.array_equal(generate_starts(beta, 4, 5)[3], s[3])


class TestDegenerateDemo:
    def test_shape(self):
        rows = degenerate_demo(1.0, 1.0, range(1, 9))
        irds = [r.ird for r in rows]
        assert all(a > b for a, b in zip(irds, irds[1:]))
        assert irds[-1] < 1e-6
        for r in rows:
            assert r.R[1] == 0.5
            assert r.R[0] + r.R[2] == pytest.approx(1.0, abs=1e-15)

    def test_closed_form(self):
        (row,) = degenerate_demo(1.0, 1.0, [2.0])
        ref = 1.0 / (1.0 + std_normal_cdf(-1.0) / std_normal_cdf(-3.0))
        assert row.R[0] == pytest.approx(ref, rel=1e-12)

    def test_monte_carlo(self):
        rng = np.random.default_rng(12)
        n = 1_000_000
        y = rng.random(n) < 0.5
        s = np.where(y, 1.0, -1.0) + rng.standard_normal(n)
        for row in degenerate_demo(1.0, 1.0, [2.0, 3.0, 4.0]):
            t = row.t
            for grp, m in enumerate((s <= -t, (s > -t) & (s <= t))):
                R = row.R[grp]
                assert abs(y[m].mean() - R) < 3 * math.sqrt(R * (1 - R) / m.sum())


@pytest.mark.parametrize("r", [(0.1, 0.5, 0.9), (0.2, 0.5, 0.8)])
def test_wdbc_few_starts(wdbc, r):
    res = fit_org(wdbc, RiskSpec(r), PenaltyConfig(10.0), SolverConfig(n_starts=2, covariance="total"))
    assert res.feasible
    assert res.best.log_likelihood < fit_lr(wdbc).log_likelihood
