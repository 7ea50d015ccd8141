import warnings

import pytest

from riccilab import MetricState, catalog_lookup


def pytest_configure(config):
    # conjugate-radius warnings are expected in clamped-volume scenarios
    warnings.filterwarnings("ignore", message=r"r_max=.*exceeds the first conjugate")


@pytest.fixture(scope="session")
def unit_state():
    return MetricState((1.0, 1.0, 1.0), 0.0)


@pytest.fixture(scope="session")
def models():
    return {name: catalog_lookup(name) for name in
            ("euclidean", "su2", "nil", "sol", "e2tilde", "sl2",
             "hyperbolic", "round-sphere")}
