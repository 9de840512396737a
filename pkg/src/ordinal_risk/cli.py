"""Command-line driver.

    ordinal-risk fit-lr --preset wdbc --input data/wdbc.csv --r 0.1,0.5,0.9
    ordinal-risk fit-org --preset wdbc --input data/wdbc.csv --r 0.2,0.5,0.8 --gamma 10
    ordinal-risk crossval --preset wdbc --input data/wdbc.csv --method org --repeats 500

Every command writes ``report.txt`` and ``result.json`` to ``--out-dir`` (the
report also goes to stdout). Failures print one line ``error <code>: <message>``
to stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data_model import NORMS, Breakpoints, Dataset, ProjectedGaussian, RiskSpec, estimate_gaussian, project
from .empirical import cross_validate, simulate_gaussian_pair
from .errors import DatasetError, OrdinalRiskError
from .logistic import fit_lr
from .org_solver import PenaltyConfig, SolverConfig, fit_org
from .risk_core import assess, feasibility_bounds, fit_breakpoints, left_ray_risk, solve_breakpoints

# worst-value block of the standard 30-feature table; see README
WDBC_PRESET = {
    "label_col": "diagnosis",
    "positive": "M",
    "features": ["intercept", "texture_worst", "area_worst:log", "smoothness_worst", "compactness_worst:log",
                 "concave_points_worst:log", "symmetry_worst:log"],
    "covariance": "total",
}

TRANSFORMS = ("identity", "log")


@dataclass
class RunConfig:
    command: str = ""
    input: str | None = None
    label_col: str = "label"
    positive: str = "1"
    features: list = field(default_factory=list)
    delimiter: str = ","
    r: list = field(default_factory=lambda: [0.1, 0.5, 0.9])
    epsilon: float = 1e-7
    norm: str = "euclidean"
    gamma: float = 0.0
    starts: int = 200
    seed: int = 0
    min_gap: float = 1e-4
    covariance: str = "pooled"
    holdout: float = 0.1
    repeats: int = 500
    method: str = "lr"
    breakpoint_method: str = "min-ird"
    beta: list | None = None
    out_dir: str = "out"
    format: str = "json"
    # figure-data / simulate
    mu0: float = -1.0
    mu1: float = 1.0
    p: float = 0.2
    sigmas: list = field(default_factory=lambda: [[4.0, 1.0], [2.0, 2.0], [1.0, 4.0]])
    x_min: float = -6.0
    x_max: float = 6.0
    x_step: float = 0.05
    sigma: float = 1.0
    n: int = 1000

    def validate(self):
        RiskSpec(tuple(self.r), self.epsilon, self.norm)
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")


# -- CSV ingestion --------------------------------------------------------------

@dataclass(frozen=True)
class LoadReport:
    path: str
    rows_read: int
    rows_kept: int
    dropped: dict          # column -> rows dropped for non-positive log input
    class_counts: tuple    # (n0, n1)

    def as_dict(self):
        return {"path": self.path, "rows_read": self.rows_read, "rows_kept": self.rows_kept,
                "dropped_nonpositive_log": self.dropped, "class_counts": list(self.class_counts)}


def _parse_feature(spec: str) -> tuple[str, str]:
    if spec in ("intercept", "add-intercept", ":add-intercept"):
        return "", "add-intercept"
    name, _, tr = spec.partition(":")
    tr = tr or "identity"
    if tr == "add-intercept":
        return "", tr
    if tr not in TRANSFORMS:
        raise DatasetError(f"unknown transform {tr!r} for column {name!r}")
    return name, tr


def load_csv(path, cfg: RunConfig) -> tuple[Dataset, LoadReport]:
    """Reads a headed CSV, maps the label column to 0/1 via ``cfg.positive`` and
    applies per-column transforms. Rows with a non-positive value in any
    log-transformed column are dropped and counted per column."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"input file not found: {path}")
    feats = [_parse_feature(f) for f in cfg.features]
    if not feats:
        raise DatasetError("no features given")
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=cfg.delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError("empty file") from None
        rows = list(reader)
    col = {h: j for j, h in enumerate(header)}
    for name in [cfg.label_col] + [n for n, t in feats if t != "add-intercept"]:
        if name not in col:
            raise DatasetError(f"missing column {name!r}")

    X, y = [], []
    dropped: dict[str, int] = {}
    n_read = 0
    for i, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        n_read += 1
        if len(row) != len(header):
            raise DatasetError(f"row {i}: expected {len(header)} fields, got {len(row)}")
        vals = []
        drop_col = None
        for name, tr in feats:
            if tr == "add-intercept":
                vals.append(1.0)
                continue
            cell = row[col[name]].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(f"row {i}, column {name!r}: cannot parse {cell!r}") from None
            if tr == "log":
                if not v > 0:
                    drop_col = drop_col or name
                    continue
                v = math.log(v)
            vals.append(v)
        if drop_col is not None:
            dropped[drop_col] = dropped.get(drop_col, 0) + 1
            continue
        X.append(vals)
        y.append(1 if row[col[cfg.label_col]].strip() == cfg.positive else 0)
    if not X:
        raise DatasetError("all rows dropped")
    names = tuple("intercept" if t == "add-intercept" else (f"log({n})" if t == "log" else n) for n, t in feats)
    data = Dataset(np.array(X), np.array(y), names)
    return data, LoadReport(str(path), n_read, data.n, dropped, data.class_counts)


# -- output helpers ---------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else (None if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    # json emits floats with repr(), the shortest round-trip form
    return json.dumps(_clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _fmt(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _table(rows: list[tuple[str, object]]) -> str:
    w = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(w)}  {_fmt(v)}" for k, v in rows)


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# -- commands -----------------------------------------------------------------------

def _load(cfg: RunConfig):
    if not cfg.input:
        raise DatasetError("--input is required")
    return load_csv(cfg.input, cfg)


def _spec(cfg: RunConfig) -> RiskSpec:
    return RiskSpec(tuple(cfg.r), cfg.epsilon, cfg.norm)


def _tau_rows(prefix, bp: Breakpoints | None, R, ird_val, feasible=None):
    rows = []
    if bp is not None:
        rows += [(f"{prefix}tau_{i + 1}", t) for i, t in enumerate(bp.tau)]
        rows += [(f"{prefix}min gap", float(np.min(bp.gaps)) if bp.gaps.size else math.nan)]
    if R is not None:
        rows += [(f"{prefix}R_{i + 1}", float(v)) for i, v in enumerate(R)]
    rows += [(f"{prefix}IRD", ird_val)]
    if feasible is not None:
        rows += [(f"{prefix}feasible", feasible)]
    return rows


def _breakpoints_for(cfg, g, spec):
    if cfg.breakpoint_method == "sequential":
        return solve_breakpoints(g, spec)
    return fit_breakpoints(g, spec)


def cmd_fit_lr(cfg: RunConfig):
    data, rep = _load(cfg)
    fit = fit_lr(data)
    spec = _spec(cfg)
    est = estimate_gaussian(data, cfg.covariance)
    sol = _breakpoints_for(cfg, project(est, fit.beta), spec)
    a = sol.assessment
    rows = [(f"beta[{n}]", float(b)) for n, b in zip(data.feature_names, fit.beta)]
    rows += [("log-likelihood", fit.log_likelihood)]
    rows += _tau_rows("", sol.breakpoints, a.R, a.ird, a.feasible)
    rows += [("IRD squared", a.ird_as(spec.r, "squared_euclidean"))]
    result = {"beta": fit.beta, "feature_names": list(data.feature_names), "log_likelihood": fit.log_likelihood,
              "converged": fit.converged, "iterations": fit.iterations, "separated": fit.separated,
              "tau": list(sol.tau), "R": a.R, "ird": a.ird, "ird_squared": a.ird_as(spec.r, "squared_euclidean"),
              "feasible": a.feasible, "breakpoint_method": sol.method, "data": rep.as_dict()}
    return _table(rows), result, {}


def cmd_fit_org(cfg: RunConfig):
    data, rep = _load(cfg)
    spec = _spec(cfg)
    scfg = SolverConfig(n_starts=cfg.starts, seed=cfg.seed, epsilon=cfg.epsilon, min_gap=cfg.min_gap,
                        covariance=cfg.covariance)
    res = fit_org(data, spec, PenaltyConfig(cfg.gamma), scfg)
    b = res.best
    a = b.assessment
    rows = [(f"beta[{n}]", float(v)) for n, v in zip(data.feature_names, b.beta)]
    rows += [("log-likelihood", b.log_likelihood), ("penalty", b.penalty_value), ("objective", b.objective)]
    rows += _tau_rows("", b.tau, a.R if a else None, a.ird if a else math.inf, b.feasible)
    rows += [("degenerate", b.degenerate), ("best start", b.start_index),
             ("feasible starts", sum(s.feasible and not s.degenerate for s in res.starts))]
    result = {"beta": b.beta, "feature_names": list(data.feature_names), "log_likelihood": b.log_likelihood,
              "penalty": b.penalty_value, "objective": b.objective,
              "tau": list(b.tau.tau) if b.tau else None, "R": a.R if a else None,
              "ird": a.ird if a else None, "feasible": b.feasible, "degenerate": b.degenerate,
              "start_index": b.start_index, "target_separations": list(res.target_separations),
              "starts": [s.__dict__ for s in res.starts], "data": rep.as_dict()}
    return _table(rows), result, {}


def _beta_or_lr(cfg, data):
    if cfg.beta is not None:
        beta = np.asarray(cfg.beta, dtype=float)
        if beta.size != data.n_features:
            raise ValueError(f"--beta has {beta.size} entries, data has {data.n_features} features")
        return beta
    return fit_lr(data).beta


def cmd_breakpoints(cfg: RunConfig):
    data, rep = _load(cfg)
    spec = _spec(cfg)
    beta = _beta_or_lr(cfg, data)
    g = project(estimate_gaussian(data, cfg.covariance), beta)
    sol = _breakpoints_for(cfg, g, spec)
    a = sol.assessment
    degenerate = bool(sol.breakpoints.gaps.size and np.min(sol.breakpoints.gaps) < cfg.min_gap)
    rows = [("mu0(beta)", g.mu0_beta), ("mu1(beta)", g.mu1_beta), ("sigma(beta)", g.sigma_beta), ("p", g.p)]
    rows += _tau_rows("", sol.breakpoints, a.R, a.ird, a.feasible) + [("degenerate", degenerate)]
    result = {"beta": beta, "projection": g.__dict__, "tau": list(sol.tau), "R": a.R, "nu": a.nu, "ird": a.ird,
              "feasible": a.feasible, "degenerate": degenerate, "method": sol.method, "data": rep.as_dict()}
    return _table(rows), result, {}


def cmd_feasibility(cfg: RunConfig):
    data, rep = _load(cfg)
    spec = _spec(cfg)
    beta = _beta_or_lr(cfg, data)
    g = project(estimate_gaussian(data, cfg.covariance), beta)
    sol = _breakpoints_for(cfg, g, spec)
    fr = feasibility_bounds(g, sol.breakpoints, spec)
    lines = ["boundary  tau  P(Y=1|score=tau)  r_i  Lambda(tau)  bound  ok"]
    for c in fr.checks:
        lines.append(f"{c.i}  {c.boundary:.6g}  {c.lhs:.6g}  {c.rhs:.6g}  {c.lr_lhs:.6g}  {c.lr_rhs:.6g}  "
                     f"{c.satisfied and c.lr_satisfied}")
    lines.append(f"first violation: {fr.first_violation}")
    result = {"beta": beta, "tau": list(sol.tau), "checks": [c.__dict__ for c in fr.checks],
              "first_violation": fr.first_violation, "data": rep.as_dict()}
    return "\n".join(lines), result, {}


def cmd_crossval(cfg: RunConfig):
    data, rep = _load(cfg)
    spec = _spec(cfg)
    scfg = SolverConfig(n_starts=cfg.starts, seed=cfg.seed, epsilon=cfg.epsilon, min_gap=cfg.min_gap,
                        covariance=cfg.covariance)
    cv = cross_validate(data, spec, cfg.method, PenaltyConfig(cfg.gamma), scfg, cfg.holdout, cfg.repeats, cfg.seed)
    rows = [(f"pooled rate group {i + 1}", v) for i, v in enumerate(cv.pooled_rates)]
    rows += [(f"pooled count group {i + 1}", v) for i, v in enumerate(cv.pooled_counts)]
    rows += [("pooled IRD squared", cv.pooled_ird_squared), ("pooled IRD", cv.pooled_ird_euclidean),
             ("mean IRD squared", cv.mean_ird_squared), ("sd IRD squared", cv.sd_ird_squared),
             ("failed repeats", cv.n_failed)]
    result = {k: v for k, v in cv.__dict__.items() if k != "repeats"}
    result["repeats"] = [r.__dict__ for r in cv.repeats]
    result["data"] = rep.as_dict()
    return _table(rows), result, {}


def cmd_figure_data(cfg: RunConfig):
    xs = np.arange(cfg.x_min, cfg.x_max + 0.5 * cfg.x_step, cfg.x_step)
    files = {}
    summary = []
    for s1, s0 in cfg.sigmas:
        q = left_ray_risk(cfg.mu0, s0, cfg.mu1, s1, cfg.p, xs)
        name = f"left_ray_s1_{s1:g}_s0_{s0:g}.csv"
        files[name] = (["x", "Q"], list(zip(xs.tolist(), q.tolist())))
        monotone = bool(np.all(np.diff(q) >= 0))
        summary.append({"sigma1": s1, "sigma0": s0, "file": name, "monotone": monotone})
    lines = [f"Q(x) curves, mu0={cfg.mu0:g}, mu1={cfg.mu1:g}, p={cfg.p:g}"]
    lines += [f"  (sigma1, sigma0) = ({d['sigma1']:g}, {d['sigma0']:g}): monotone={d['monotone']}" for d in summary]
    result = {"curves": summary}
    if cfg.input:
        data, rep = _load(cfg)
        beta = _beta_or_lr(cfg, data)
        g = project(estimate_gaussian(data, cfg.covariance), beta)
        sol = _breakpoints_for(cfg, g, _spec(cfg))
        s = data.features @ beta
        files["scores.csv"] = (["score", "label"], list(zip(s.tolist(), data.labels.tolist())))
        files["tau.csv"] = (["i", "tau"], [(i + 1, t) for i, t in enumerate(sol.tau)])
        result.update({"tau": list(sol.tau), "data": rep.as_dict()})
        lines.append(f"scores for {data.n} rows, tau = {', '.join(f'{t:.6g}' for t in sol.tau)}")
    return "\n".join(lines), result, files


def cmd_simulate(cfg: RunConfig):
    g = ProjectedGaussian(cfg.mu0, cfg.mu1, cfg.sigma, cfg.p)
    scores, labels = simulate_gaussian_pair(g, cfg.n, cfg.seed)
    spec = _spec(cfg)
    sol = _breakpoints_for(cfg, g, spec)
    from .empirical import empirical_interval_risk
    er = empirical_interval_risk(scores, labels, sol.breakpoints)
    rows = _tau_rows("", sol.breakpoints, sol.assessment.R, sol.assessment.ird)
    rows += [(f"empirical R_{i + 1}", float(v)) for i, v in enumerate(er.rates)]
    rows += [(f"count {i + 1}", int(c)) for i, c in enumerate(er.counts)]
    result = {"tau": list(sol.tau), "R": sol.assessment.R, "empirical_rates": er.rates, "counts": er.counts}
    files = {"simulated.csv": (["score", "label"], list(zip(scores.tolist(), labels.tolist())))}
    return _table(rows), result, files


COMMANDS = {
    "fit-lr": cmd_fit_lr,
    "fit-org": cmd_fit_org,
    "breakpoints": cmd_breakpoints,
    "feasibility": cmd_feasibility,
    "crossval": cmd_crossval,
    "figure-data": cmd_figure_data,
    "simulate": cmd_simulate,
}


# -- argument handling ----------------------------------------------------------------

def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _sigma_pairs(s: str) -> list[list[float]]:
    return [[float(a) for a in pair.split(":")] for pair in s.split(",")]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ordinal-risk", description="Ordinal risk-group estimation")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    ap.add_argument("--preset", choices=["wdbc"], help="column mapping and estimator defaults")
    ap.add_argument("--input")
    ap.add_argument("--label-col", dest="label_col")
    ap.add_argument("--positive")
    ap.add_argument("--features", type=lambda s: s.split(","), help="name[:identity|log],...,intercept")
    ap.add_argument("--delimiter")
    ap.add_argument("--r", type=_floats)
    ap.add_argument("--epsilon", type=float)
    ap.add_argument("--norm", choices=NORMS)
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--starts", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--min-gap", dest="min_gap", type=float)
    ap.add_argument("--covariance", choices=["pooled", "total"])
    ap.add_argument("--holdout", type=float)
    ap.add_argument("--repeats", type=int)
    ap.add_argument("--method", choices=["lr", "org"], help="crossval model")
    ap.add_argument("--breakpoint-method", dest="breakpoint_method", choices=["min-ird", "sequential"])
    ap.add_argument("--beta", type=_floats, help="score coefficients (default: LR fit)")
    ap.add_argument("--out-dir", dest="out_dir")
    ap.add_argument("--format", choices=["json"])
    ap.add_argument("--mu0", type=float)
    ap.add_argument("--mu1", type=float)
    ap.add_argument("--p", type=float)
    ap.add_argument("--sigma", type=float)
    ap.add_argument("--sigmas", type=_sigma_pairs, help="sigma1:sigma0 pairs, e.g. 4:1,2:2,1:4")
    ap.add_argument("--x-min", dest="x_min", type=float)
    ap.add_argument("--x-max", dest="x_max", type=float)
    ap.add_argument("--x-step", dest="x_step", type=float)
    ap.add_argument("--n", type=int)
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults < preset < config file < flags"""
    cfg = RunConfig(command=args.command)
    known = set(cfg.__dataclass_fields__)
    if args.preset == "wdbc":
        for k, v in WDBC_PRESET.items():
            setattr(cfg, k, list(v) if isinstance(v, list) else v)
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for k, v in doc.items():
            setattr(cfg, k, v)
    for k, v in vars(args).items():
        if k in known and k != "command" and v is not None:
            setattr(cfg, k, v)
    cfg.validate()
    return cfg


def run(cfg: RunConfig) -> int:
    report, result, files = COMMANDS[cfg.command](cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = dict(result)
    result["config"] = dict(cfg.__dict__)
    (out / "report.txt").write_text(report + "\n")
    (out / "result.json").write_text(dumps(result))
    for name, (header, rows) in files.items():
        _write_csv(out / name, header, rows)
    print(report)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return run(cfg)
    except OrdinalRiskError as exc:
        print(f"error {exc.code}: {exc}".replace("\n", " "), file=sys.stderr)
    except (ValueError, OSError) as exc:
        print(f"error invalid_input: {exc}".replace("\n", " "), file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
