import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from heegner_witness.ec_core import CurveQ


@pytest.fixture(scope="session")
def e11a():
    return CurveQ(0, -1, 1, -10, -20, 11, "11a")


@pytest.fixture(scope="session")
def e37a():
    return CurveQ(0, 0, 1, -1, 0, 37, "37a")


@pytest.fixture(scope="session")
def e389a():
    return CurveQ(0, 1, 1, -2, 0, 389, "389a")


@pytest.fixture(scope="session")
def e_ss():
    # y^2 = x^3 + x, CM curve, conductor 32
    return CurveQ(0, 0, 0, 1, 0, 32, "32a")
