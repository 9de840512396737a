from pathlib import Path

import pytest

from ordinal_risk.cli import WDBC_PRESET, RunConfig, load_csv

DATA = Path(__file__).resolve().parent.parent / "data" / "wdbc.csv"


def wdbc_config(**kw) -> RunConfig:
    cfg = RunConfig(input=str(DATA), label_col=WDBC_PRESET["label_col"], positive=WDBC_PRESET["positive"],
                    features=list(WDBC_PRESET["features"]), covariance=WDBC_PRESET["covariance"])
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg


@pytest.fixture(scope="session")
def wdbc():
    data, _ = load_csv(DATA, wdbc_config())
    return data


@pytest.fixture(scope="session")
def wdbc_report():
    return load_csv(DATA, wdbc_config())[1]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=lambda k: (int(k.split()[1].rstrip("b")), k)):
            terminalreporter.write_line(RESULTS[key])
