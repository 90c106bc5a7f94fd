import numpy as np
import pytest

from camdp import FactoredCamdp, GeneratorSpec, SolverConfig, case_study_model, random_camdp


def random_model(seed, dims=(2, 2, 2, 2, 2)):
    return random_camdp(GeneratorSpec(dims, seed))


def random_policy(model, rng):
    from camdp import JointPolicy

    return JointPolicy(
        rng.integers(model.na0, size=model.n_cells0).tolist(),
        rng.integers(model.na1, size=model.n_cells1).tolist(),
    )


def arrays_model(p0, ps, p1, r0, rs, r1):
    return FactoredCamdp.from_arrays(p0, ps, p1, r0, rs, r1)


@pytest.fixture(scope="session")
def case_model():
    return case_study_model()


@pytest.fixture
def cfg():
    return SolverConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
