import warnings

import pytest

from jacobibv import examples as ex
from jacobibv.bialgebroid import plane_enriched_example, plane_omega_example
from jacobibv.report import InvalidStructureWarning
from jacobibv.symalg import Chart

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def _quiet_invalid_structures():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InvalidStructureWarning)
        yield


@pytest.fixture(scope="session")
def contact1():
    return ex.contact_canonical(1)


@pytest.fixture(scope="session")
def contact2():
    return ex.contact_canonical(2)


@pytest.fixture(scope="session")
def gcs1():
    return ex.gcs_structure(1)


@pytest.fixture(scope="session")
def plane_poisson():
    return ex.constant_poisson([[0, 1], [-1, 0]])


@pytest.fixture(scope="session")
def chart3():
    return Chart(("x1", "x2", "x3"))


@pytest.fixture(scope="session")
def plane_omega():
    return plane_omega_example()


@pytest.fixture(scope="session")
def plane_enriched():
    return plane_enriched_example()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
