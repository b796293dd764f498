import re

_CRITERION_RE = re.compile(r"test_criterion_(\d+)")
_results: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = _CRITERION_RE.search(report.nodeid)
    if not m:
        return
    number = int(m.group(1))
    label = report.nodeid.split("::")[-1]
    label = label.replace(f"test_criterion_{m.group(1)}_", "").replace("_", " ")
    _results[number] = (label, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_results):
        label, outcome = _results[number]
        terminalreporter.write_line(
            f"criterion {number} ({label}): {outcome}")
