import numpy as np
import pytest

from v2xuplink.pointprocess import NetworkParams


@pytest.fixture(scope="session")
def fig3_params():
    # sparse vehicles, moderate roads: the distance-law validation setting
    return NetworkParams(lambda_R=0.005, mu_v=0.001, lambda_b=2e-5)


@pytest.fixture(scope="session")
def fig4_params():
    # denser vehicles on sparse roads: the threshold-sweep setting
    return NetworkParams(lambda_R=0.001, mu_v=0.1, lambda_b=2e-5)


@pytest.fixture(scope="session")
def param_grid():
    """Parameter tuples spanning the experiment ranges, deterministic."""
    rng = np.random.default_rng(20240817)
    tuples = []
    for _ in range(50):
        tuples.append(
            NetworkParams(
                lambda_R=float(10 ** rng.uniform(-3, -1)),
                mu_v=float(10 ** rng.uniform(-3, 0)),
                lambda_b=float(10 ** rng.uniform(-6, -3)),
                bias_B=float(10 ** rng.uniform(-2, 4)),
            )
        )
    return tuples
