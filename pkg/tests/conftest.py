import pytest

_VERDICTS: dict[int, tuple[str, bool, str]] = {}


class Verdict:
    """Collects the checks of one acceptance criterion and records PASS/FAIL."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.checks: list[tuple[str, bool]] = []

    def check(self, desc: str, ok) -> bool:
        self.checks.append((desc, bool(ok)))
        return bool(ok)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(ok for _, ok in self.checks)

    def finish(self):
        failed = [d for d, ok in self.checks if not ok]
        detail = "; ".join(failed) if failed else "; ".join(d for d, _ in self.checks)
        _VERDICTS[self.number] = (self.title, self.passed, detail)
        line = f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.title}"
        print(line)
        for d, ok in self.checks:
            print(f"    [{'ok' if ok else 'FAIL'}] {d}")
        assert self.passed, f"criterion {self.number} failed: {detail}"


@pytest.fixture
def verdict():
    made = []

    def make(number: int, title: str) -> Verdict:
        v = Verdict(number, title)
        made.append(v)
        return v

    return make


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        title, ok, detail = _VERDICTS[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}")
        if not ok:
            terminalreporter.write_line(f"    failed: {detail}")
