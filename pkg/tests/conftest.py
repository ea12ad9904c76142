import pytest

_results: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    label = getattr(item.function, "criterion", None)
    if label is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _results[item.nodeid] = (label, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    merged: dict[str, str] = {}
    for label, verdict in _results.values():
        if merged.get(label) != "FAIL":
            merged[label] = verdict
    for label in sorted(merged, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(f"{merged[label]}  {label}")
