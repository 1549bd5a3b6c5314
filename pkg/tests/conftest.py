import pytest

ACCEPTANCE_LINES: list = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        ACCEPTANCE_LINES.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


AUDIT_COUNT = [0]


@pytest.fixture(autouse=True)
def audit_all_embeddings(monkeypatch):
    """Audit every embedding any library call enumerates during a test."""
    from treekit import fraisse, indiscernibles, patterns, ramsey

    original = patterns.iter_embeddings

    def audited(source, target, respect_p=True, accept=None):
        for emb in original(source, target, respect_p, accept):
            problems = emb.audit(respect_p)
            assert not problems, f"embedding audit failed: {problems}"
            AUDIT_COUNT[0] += 1
            yield emb

    for module in (patterns, ramsey, fraisse, indiscernibles):
        monkeypatch.setattr(module, "iter_embeddings", audited)
    yield
