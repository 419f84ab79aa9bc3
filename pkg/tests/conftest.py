"""Registers the acceptance marker and prints its one-line-per-criterion summary."""

_LABELS: dict[str, str] = {}
_RESULTS: dict[str, tuple[str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(label): criterion check reported as one pass/fail line",
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None and marker.args:
            _LABELS[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    if report.nodeid not in _LABELS:
        return
    # setup/teardown failures count too; a passed setup is not a verdict
    if report.when == "call" or report.outcome != "passed":
        _RESULTS[report.nodeid] = (report.outcome, getattr(report, "duration", 0.0))


def pytest_terminal_summary(terminalreporter):
    if not _LABELS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    words = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for nodeid, label in _LABELS.items():
        outcome, duration = _RESULTS.get(nodeid, ("not run", 0.0))
        word = words.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{word}  {label}  [{duration:.2f}s]")
