import numpy as np
import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion covered by the test")


@pytest.fixture
def note(request):
    """Attach a one-line measurement to the acceptance report for this test."""
    def _note(text):
        request.node.user_properties.append(("note", str(text)))
    return _note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        notes = "; ".join(v for k, v in item.user_properties if k == "note")
        if hasattr(rep, "wasxfail"):
            status = "XFAIL"
        else:
            status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _RESULTS[(marker.args[0], item.name)] = (status, notes)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (label, name), (status, notes) in sorted(_RESULTS.items()):
        line = f"criterion {label:<3} {status:<5} {name}"
        if notes:
            line += f" ({notes})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
