import numpy as np
import pytest
from hypothesis import settings

from hfmoments import kernels
from hfmoments.fixtures import load_fixture
from hfmoments.problem import build_problem

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    impl = kernels.get_backend(request.param)
    for name in ("wick_product", "jordan_wigner_terms", "pauli_product", "pauli_apply"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def _problem(name, **kw):
    mi, di, _ = load_fixture(name)
    return build_problem(mi, di, **kw)


@pytest.fixture(scope="session")
def h2():
    return _problem("h2")


@pytest.fixture(scope="session")
def h2_field():
    return _problem("h2_field")


@pytest.fixture(scope="session")
def h4():
    return _problem("h4")


@pytest.fixture(scope="session")
def h4_unshifted():
    return _problem("h4", energy_shift=0.0)


@pytest.fixture(scope="session")
def water():
    # 1a1 folded into the core; 2a1 and 1b1 frozen in the moment operators
    return _problem("water", frozen_core=[0], moment_frozen=[0, 3])


@pytest.fixture(scope="session")
def water_unshifted():
    return _problem("water", frozen_core=[0], moment_frozen=[0, 3], energy_shift=0.0)


@pytest.fixture(scope="session")
def h4_vqe(h4):
    return h4.optimize()


@pytest.fixture(scope="session")
def h2_field_vqe(h2_field):
    return h2_field.optimize()


@pytest.fixture(scope="session")
def water_vqe(water):
    return water.optimize()
