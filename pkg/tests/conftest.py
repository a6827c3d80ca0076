import numpy as np
import pytest

from dwell import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ref_params():
    """Reference point used throughout: J=2, unbiased, equal damping."""
    return ModelParams(delta=0.0, j=2.0, gamma1=1.0, gamma2=1.0, nbar1=1.0, nbar2=2.0)


def random_params(rng, *, damped=True, equal=True):
    gamma = rng.uniform(0.05, 3.0) if damped else 0.0
    return ModelParams(
        delta=rng.uniform(0, 10),
        j=rng.uniform(0, 5),
        gamma1=gamma,
        gamma2=gamma if equal else (rng.uniform(0.05, 3.0) if damped else 0.0),
        nbar1=rng.uniform(0, 5),
        nbar2=rng.uniform(0, 5),
    )


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
