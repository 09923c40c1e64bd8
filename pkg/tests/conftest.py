"""Collects acceptance outcomes and prints one line per criterion at the end."""
from collections import defaultdict

ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)


def record(criterion: int, check: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE[criterion].append((check, bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(c[1] for c in checks)
        parts = "; ".join(f"{name} {'pass' if good else 'FAIL'}{' (' + d + ')' if d else ''}"
                          for name, good, d in checks)
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} | {parts}")
