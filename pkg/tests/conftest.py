import re


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", rep.nodeid)
            if m and rep.when == "call":
                verdict = "PASS" if rep.passed else "FAIL"
                lines.append((int(m[1]), f"criterion {int(m[1]):2d} {m[2]}: {verdict}"))
    if lines:
        terminalreporter.section("acceptance")
        for _, text in sorted(lines):
            terminalreporter.write_line(text)
