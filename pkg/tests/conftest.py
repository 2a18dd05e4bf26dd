import sys

import numpy as np
import pytest

from plab.grid import BoxDomain
from plab.norms import make_battery

@pytest.fixture(scope="session")
def box1():
    return BoxDomain(1, 4.0, 1024)


@pytest.fixture(scope="session")
def battery1(box1):
    return make_battery(box1)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
