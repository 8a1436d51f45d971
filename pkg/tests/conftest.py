import pytest

from cyclectx.quantum import kcbs_realization
from cyclectx.scenario import make_cycle_scenario


@pytest.fixture(scope="session")
def kcbs():
    return kcbs_realization()


@pytest.fixture(scope="session")
def cycle5():
    return make_cycle_scenario(5)
