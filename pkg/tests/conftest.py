ACCEPTANCE = {}


def record(criterion, passed, detail):
    """Store and print one PASS/FAIL line for an acceptance criterion."""
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return passed


def _key(c):
    num = "".join(ch for ch in c if ch.isdigit())
    return int(num), c


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE, key=_key):
        terminalreporter.write_line(ACCEPTANCE[c])
