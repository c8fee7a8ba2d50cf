ACCEPTANCE = {}


def record(number, ok, detail):
    """Store one acceptance verdict; printed in the terminal summary."""
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
