def pytest_terminal_summary(terminalreporter):
    """Reprint the acceptance checklist lines captured from test stdout."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            for _, content in rep.get_sections("Captured stdout call"):
                for line in content.splitlines():
                    if line.startswith("ACCEPTANCE "):
                        lines.append(line)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(set(lines), key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
