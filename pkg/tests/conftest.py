import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from loopdress.lie import su2, su3_k2, su3_k3
from loopdress.loops import LoopContext

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["su2", "su3_k2", "su3_k3"])
def alg(request):
    return {"su2": su2, "su3_k2": su3_k2, "su3_k3": su3_k3}[request.param]()


@pytest.fixture
def ctx2():
    return LoopContext(su2())
