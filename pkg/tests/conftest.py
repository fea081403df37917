import warnings

import pytest

from jtrates.errors import DegenerateParametersWarning
from jtrates.tables import TABLES
from jtrates.telegraph import TelegraphParams


@pytest.fixture
def merton():
    return TABLES[1].model


@pytest.fixture
def dothan():
    return TABLES[2].model


@pytest.fixture
def merton_diffusive():
    return TABLES[3].model


@pytest.fixture
def dothan_diffusive():
    return TABLES[4].model


@pytest.fixture
def telegraph():
    return TelegraphParams(c0=-0.02, c1=0.05, h0=0.01, h1=-0.02, lam0=1.0, lam1=2.0)


@pytest.fixture
def quiet_degenerate():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateParametersWarning)
        yield
