import pytest

from fracproj.params import structural_config


@pytest.fixture
def cfg16():
    """m = 16, tau = 1/2, t = 5/6 at a chosen depth."""
    def make(n: int):
        return structural_config(2, 4, "1/2", "5/6", n)

    return make


_criteria: dict = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.outcome != "passed":
        num = int(name.split("_")[2])
        _criteria[num] = _criteria.get(num, True) and report.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if _criteria[num] else 'FAIL'}")
