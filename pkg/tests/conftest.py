import numpy as np
import pytest

from qmoment.psf import TransferModel


@pytest.fixture(params=["gaussian", "rect"])
def model(request):
    return TransferModel(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
