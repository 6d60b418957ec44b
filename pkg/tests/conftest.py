from collections import defaultdict

# criterion number -> list of (part, passed, detail), filled by test_acceptance
CRITERIA: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        parts = CRITERIA[num]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {'ok' if good else 'FAIL'} ({d})" for name, good, d in parts)
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
