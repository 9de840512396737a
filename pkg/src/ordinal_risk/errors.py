"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can emit a
single parseable line on failure.
"""


class OrdinalRiskError(Exception):
    code = "error"


class DomainError(OrdinalRiskError, ValueError):
    code = "domain"


class NoRootError(OrdinalRiskError, ValueError):
    code = "no_root"


class ConvergenceError(OrdinalRiskError, RuntimeError):
    code = "no_convergence"

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class DatasetError(OrdinalRiskError, ValueError):
    code = "dataset"


class EstimationError(OrdinalRiskError, ValueError):
    code = "singular_covariance"

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class DegenerateProjectionError(OrdinalRiskError, ValueError):
    code = "degenerate_projection"


class VanishingIntervalError(OrdinalRiskError, ValueError):
    code = "vanishing_interval"

    def __init__(self, message, interval):
        super().__init__(message)
        self.interval = interval


class DegenerateTargetError(OrdinalRiskError, ValueError):
    code = "degenerate_target"


class InfeasibleBreakpointsError(OrdinalRiskError):
    """Raised when the sequential breakpoint solve cannot match ``r_i``.

    ``record`` is an :class:`ordinal_risk.risk_core.Infeasibility`.
    """

    code = "infeasible"

    def __init__(self, record):
        super().__init__(
            f"risk level r_{record.step}={record.target:.6g} is outside the attainable "
            f"range ({record.attainable_low:.6g}, {record.attainable_high:.6g})"
        )
        self.record = record


class PenaltyUndefinedError(OrdinalRiskError, ValueError):
    code = "penalty_undefined"


class RankDeficientError(OrdinalRiskError, ValueError):
    code = "rank_deficient"


class SeparationWarning(UserWarning):
    pass
