import pytest

from labelcut.generators import PermutationTable, gadget_instance, label_id

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def identity_gadget():
    """k=2, d=2, h=1 with the identity permutation."""
    table = PermutationTable.identity(2, 2, 1)
    return gadget_instance(table), table


@pytest.fixture
def lab():
    """Label id of pair (mu, j) for d=2."""
    return lambda mu, j, d=2: label_id(mu, j, d)


@pytest.fixture
def criterion():
    def record(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
