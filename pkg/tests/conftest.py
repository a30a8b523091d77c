from __future__ import annotations

import numpy as np
import pytest

from decinfo.spectral import DecimationModel, FrequencyGrid
from models import cosine_model


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


# ---------------------------------------------------------------------------
# Acceptance reporting: one PASS/FAIL line per criterion in the summary.
# ---------------------------------------------------------------------------

_criteria: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _criteria[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title, detail = _criteria[number]
        line = f"criterion {number:2d} {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
    passed = sum(1 for s, _, _ in _criteria.values() if s == "PASS")
    terminalreporter.write_line(f"{passed}/{len(_criteria)} criteria passed")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid4096() -> FrequencyGrid:
    return FrequencyGrid(4096)


@pytest.fixture(scope="session")
def cos_model(grid4096) -> DecimationModel:
    return cosine_model(grid4096, 2)

