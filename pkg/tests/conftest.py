import pytest

from siegelmod.localdensity import measure_table
from siegelmod.quadform import QuadraticForm

# forms used across the suite
MAASS_FORM = QuadraticForm.diagonal(1, 1, 1, 1, -1)  # m=5, p=4, N=4
HOLO_FORM = QuadraticForm.diagonal(1, 1, -1, -1, -1, -1)  # m=6, p=2, N=4
ODD_HOLO_FORM = QuadraticForm.diagonal(1, 1, 1, -1, -1)  # m=5, p=3
MIXED_FORM = QuadraticForm.direct_sum(QuadraticForm([[2, 1], [1, 2]]), QuadraticForm.diagonal(1, 1, -1))

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number:>2} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def maass_tables():
    """Measures of the m=5 reference form for n = 1..40 at prime bounds 10 and 50."""
    return {
        pb: (measure_table(MAASS_FORM, 1, 40, pb), measure_table(MAASS_FORM, -1, 40, pb)) for pb in (10, 50)
    }


@pytest.fixture(scope="session")
def holo_tables():
    return {pb: measure_table(HOLO_FORM, 1, 40, pb) for pb in (10, 50)}


@pytest.fixture(scope="session")
def odd_fe_tables():
    """m=5 holomorphic data; odd m needs a long Euler product."""
    return measure_table(ODD_HOLO_FORM, 1, 80, 30000, hensel_above=100)
