import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import FIXTURE_Z, FIXTURE_Z_INJ  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture
def fixture_z():
    return FIXTURE_Z.copy()


@pytest.fixture
def fixture_z_inj():
    return FIXTURE_Z_INJ.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def data_dir():
    return DATA


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome, dict(report.user_properties)))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, props in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        detail = " ".join(f"{k}={v}" for k, v in props.items())
        terminalreporter.write_line(f"{status}  {name}  {detail}")
