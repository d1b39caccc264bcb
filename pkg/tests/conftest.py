"""Prints one PASS/FAIL line per acceptance criterion after the run."""

_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.failed:
        prev = _results.get(report.nodeid)
        ok = report.passed and (prev is None or prev[0])
        _results[report.nodeid] = (ok, props["criterion"], props.get("measured", ""))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for ok, title, measured in sorted(_results.values(), key=lambda r: r[1]):
        line = f"{'PASS' if ok else 'FAIL'}  {title}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)
