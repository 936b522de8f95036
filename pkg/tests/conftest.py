"""Print one pass/fail line per acceptance check, visible in plain pytest runs."""


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    label = report.nodeid.split("::")[-1]
    if report.passed:
        status = "PASS"
    elif report.failed:
        status = "FAIL"
    else:
        status = "SKIP"
    print(f"\nacceptance {label}: {status} ({report.duration:.2f}s)", flush=True)
