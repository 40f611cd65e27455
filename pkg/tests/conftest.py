import numpy as np
import pytest

from irradsim.dailyfit import M_C
from irradsim.ingest import DailySeries
from irradsim.modelfile import reference_model
from irradsim.pv import S60PC_250, extract_diode_model


@pytest.fixture(scope="session")
def ref_model():
    return reference_model()


@pytest.fixture(scope="session")
def diode():
    return extract_diode_model(S60PC_250)


def parabola_day(d, A, B, C, cadence=10.0, m_c=M_C):
    """Exact clear-sky bell on a regular grid, zero outside the daytime."""
    m = np.arange(0.0, 1440.0, cadence)
    x = (m / m_c - A) / B
    E = np.where(np.abs(x) <= 1, C * (1 - x * x), 0.0)
    return DailySeries(d, m, E)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
