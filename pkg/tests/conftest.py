def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # Re-emit the one-line-per-criterion acceptance results after the run,
    # where output capture cannot swallow them.
    try:
        from test_acceptance import ACCEPTANCE_RESULTS
    except ImportError:
        return
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail in sorted(ACCEPTANCE_RESULTS):
        line = f"ACCEPTANCE {number}: {status}"
        if detail:
            line += f" — {detail}"
        terminalreporter.write_line(line)
