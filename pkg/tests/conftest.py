import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# criterion label ("5", "7b", ...) -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def _order(label: str):
    digits = "".join(c for c in label if c.isdigit())
    return int(digits), label


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"acceptance {criterion:>3}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def report():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=_order):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{label:>3} {'PASS' if ok else 'FAIL'}  {detail}")
