import json

import numpy as np
import pytest

from ordinal_risk import cli
from ordinal_risk.data_model import Dataset
from ordinal_risk.logistic import log_likelihood

from conftest import DATA


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = cli.main(args + ["--out-dir", str(out)])
    return code, out


def wdbc_args(cmd, *extra):
    return [cmd, "--preset", "wdbc", "--input", str(DATA), *extra]


class TestLoadCsv:
    def test_log_drop(self, tmp_path):
        f = tmp_path / "toy.csv"
        f.write_text("y,a,b\n1,1.0,2.0\n0,0.0,3.0\n0,2.0,4.5\n")
        cfg = cli.RunConfig(label_col="y", positive="1", features=["intercept", "a:log", "b"])
        data, rep = cli.load_csv(f, cfg)
        assert data.n == 2 and rep.dropped == {"a": 1}
        np.testing.assert_allclose(data.features[:, 1], [0.0, np.log(2.0)])
        assert data.feature_names == ("intercept", "log(a)", "b")

    def test_parse_error(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("y,a\n1,1.0\n0,abc\n")
        with pytest.raises(Exception, match="row 3.*'a'"):
            cli.load_csv(f, cli.RunConfig(label_col="y", features=["a"]))

    def test_missing_column(self, tmp_path):
        f = tmp_path / "m.csv"
        f.write_text("y,a\n1,1\n0,2\n")
        with pytest.raises(Exception, match="missing column"):
            cli.load_csv(f, cli.RunConfig(label_col="y", features=["z"]))

    def test_all_dropped(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a\n1,0\n0,-1\n")
        with pytest.raises(Exception, match="all rows dropped"):
            cli.load_csv(f, cli.RunConfig(label_col="y", features=["a:log"]))

    def test_wdbc_counts(self, wdbc_report):
        assert wdbc_report.rows_read == 569
        assert wdbc_report.rows_kept == 556
        assert wdbc_report.class_counts == (344, 212)
        assert wdbc_report.dropped == {"concave_points_worst": 13}


class TestCommands:
    def test_fit_lr_round_trip(self, tmp_path, wdbc):
        code, out = run(wdbc_args("fit-lr"), tmp_path)
        assert code == 0
        doc = json.loads((out / "result.json").read_text())
        assert log_likelihood(np.array(doc["beta"]), wdbc) == pytest.approx(doc["log_likelihood"], abs=1e-8)
        assert "log-likelihood" in (out / "report.txt").read_text()
        assert doc["config"]["covariance"] == "total"

    def test_byte_identical(self, tmp_path):
        _, a = run(wdbc_args("breakpoints", "--r", "0.1,0.5,0.9"), tmp_path, "a")
        _, b = run(wdbc_args("breakpoints", "--r", "0.1,0.5,0.9"), tmp_path, "b")
        ja = (a / "result.json").read_text().replace(str(a), "")
        jb = (b / "result.json").read_text().replace(str(b), "")
        assert ja == jb

    def test_degenerate_target_exit(self, tmp_path, capsys):
        code, _ = run(wdbc_args("breakpoints", "--r", "0,0.5,0.9"), tmp_path)
        err = capsys.readouterr().err.strip().splitlines()
        assert code == 1 and len(err) == 1 and err[0].startswith("error degenerate_target:")

    def test_missing_input(self, tmp_path, capsys):
        code, _ = run(["fit-lr", "--features", "a", "--input", str(tmp_path / "nope.csv")], tmp_path)
        assert code == 1 and capsys.readouterr().err.startswith("error dataset:")

    def test_feasibility(self, tmp_path):
        code, out = run(wdbc_args("feasibility", "--r", "0.2,0.5,0.8"), tmp_path)
        doc = json.loads((out / "result.json").read_text())
        assert code == 0 and doc["first_violation"] == 2

    def test_figure_data(self, tmp_path):
        code, out = run(wdbc_args("figure-data", "--r", "0.1,0.5,0.9"), tmp_path)
        assert code == 0
        assert (out / "left_ray_s1_4_s0_1.csv").exists() and (out / "scores.csv").exists()
        rows = (out / "tau.csv").read_text().splitlines()
        assert rows[0] == "i,tau" and len(rows) == 3

    def test_simulate(self, tmp_path):
        code, out = run(["simulate", "--mu0", "-1", "--mu1", "1", "--sigma", "2", "--p", "0.5", "--n", "500",
                         "--r", "0.2,0.5,0.8", "--seed", "3"], tmp_path)
        assert code == 0
        assert len((out / "simulated.csv").read_text().splitlines()) == 501

    def test_config_precedence(self, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"r": [0.2, 0.5, 0.8], "seed": 4}))
        code, out = run(wdbc_args("breakpoints", "--config", str(conf), "--seed", "7"), tmp_path)
        doc = json.loads((out / "result.json").read_text())
        assert code == 0 and doc["config"]["r"] == [0.2, 0.5, 0.8] and doc["config"]["seed"] == 7

    def test_unknown_config_key(self, tmp_path, capsys):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"colour": 1}))
        code, _ = run(wdbc_args("fit-lr", "--config", str(conf)), tmp_path)
        assert code == 1 and "unknown config keys" in capsys.readouterr().err

    def test_fit_org_small(self, tmp_path):
        code, out = run(wdbc_args("fit-org", "--r", "0.2,0.5,0.8", "--gamma", "10", "--starts", "1"), tmp_path)
        doc = json.loads((out / "result.json").read_text())
        assert code == 0 and doc["feasible"] and not doc["degenerate"]

    def test_crossval_small(self, tmp_path):
        code, out = run(wdbc_args("crossval", "--r", "0.1,0.5,0.9", "--repeats", "3"), tmp_path)
        doc = json.loads((out / "result.json").read_text())
        assert code == 0 and len(doc["repeats"]) == 3
