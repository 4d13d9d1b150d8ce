import pytest

from gtsearch.codes import ConcatParams, build_code


@pytest.fixture
def small_params():
    return ConcatParams(q=3, layers=2, inner_len=3, inner_weight=1)


@pytest.fixture
def small_code(small_params):
    return build_code(small_params, 9)


_criteria: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = report.user_properties and dict(report.user_properties).get("criterion")
    if label:
        _criteria.setdefault(label, []).append(report.outcome)


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker:
        item.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: (int(s.split()[0]), s)):
        outcomes = _criteria[label]
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {label}")
