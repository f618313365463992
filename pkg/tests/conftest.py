import math

import pytest

from rwndirac import CoordinateMap, ConstantsLedger, Nucleus, build_spacetime, extremal_mass_number
from rwndirac.coordinates import Rescale
from rwndirac.operator import RadialMode

# Canonical subextremal configuration used throughout: Z = 1, A = 2e18.
SUB_Z, SUB_A = 1, 2.0e18


@pytest.fixture(scope="session")
def ledger():
    return ConstantsLedger()


@pytest.fixture(scope="session")
def sub(ledger):
    """Reference subextremal spacetime (rho ~ 11.14)."""
    return build_spacetime(Nucleus(Z=SUB_Z, A=SUB_A), ledger)


@pytest.fixture(scope="session")
def extremal(ledger):
    return build_spacetime(Nucleus(Z=1, A=extremal_mass_number(1, ledger)), ledger)


@pytest.fixture(scope="session")
def sub_map(sub):
    return CoordinateMap(sub, Rescale.BY_INNER_RADIUS)


@pytest.fixture(scope="session")
def sub_map_raw(sub):
    return CoordinateMap(sub, Rescale.NONE)


@pytest.fixture(scope="session")
def ext_map(extremal):
    return CoordinateMap(extremal, Rescale.BY_INNER_RADIUS)


@pytest.fixture(scope="session")
def mode_theta0(sub):
    return RadialMode(sub, k=1, theta=0.0)


@pytest.fixture(scope="session")
def mode_theta45(sub):
    return RadialMode(sub, k=1, theta=math.pi / 4)


@pytest.fixture(scope="session")
def mode_anom(sub):
    return RadialMode(sub, k=1, fa=1.0)


@pytest.fixture(scope="session")
def ext_mode_theta0(extremal):
    return RadialMode(extremal, k=1, theta=0.0)


@pytest.fixture(scope="session")
def ext_mode_anom(extremal):
    return RadialMode(extremal, k=1, fa=1.0)
