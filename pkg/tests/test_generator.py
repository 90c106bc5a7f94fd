import numpy as np
import pytest

from camdp import GenerationError, GeneratorSpec, random_camdp, validate
from camdp.generator import all_policies_quasi_positive


def test_same_seed_same_model():
    a = random_camdp(GeneratorSpec(seed=11))
    b = random_camdp(GeneratorSpec(seed=11))
    for k in ("p0", "ps", "p1", "r0", "rs", "r1"):
        np.testing.assert_array_equal(getattr(a, k), getattr(b, k))
    c = random_camdp(GeneratorSpec(seed=12))
    assert not np.array_equal(a.ps, c.ps)


@pytest.mark.parametrize("seed", range(20))
def test_generated_models_are_valid_and_ergodic(seed):
    m = random_camdp(GeneratorSpec(seed=seed))
    assert validate(m) == []
    assert np.all(m.r0 > 0.01 - 1e-15) and np.all(m.rs <= 1.0)
    assert all_policies_quasi_positive(m)


def test_custom_dims():
    m = random_camdp(GeneratorSpec((3, 2, 1, 2, 3), seed=1))
    assert m.dims == (3, 2, 1, 2, 3)
    assert m.ps.shape == (2, 3, 2, 2)


def test_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec((2, 2, 2, 2))
    with pytest.raises(ValueError):
        GeneratorSpec(reward_min=0.0)
    with pytest.raises(ValueError):
        GeneratorSpec(transition_law="dirichlet")


def test_spec_record_names_rng():
    d = GeneratorSpec(seed=5).as_dict()
    assert d["rng"] == "numpy.PCG64" and d["seed"] == 5 and d["dims"] == [2, 2, 2, 2, 2]


def test_retry_cap(monkeypatch):
    import camdp.generator as gen

    monkeypatch.setattr(gen, "all_policies_quasi_positive", lambda m: False)
    with pytest.raises(GenerationError):
        random_camdp(GeneratorSpec(seed=0))


@pytest.mark.parametrize("seed", range(3))
def test_every_joint_policy_chain_is_quasi_positive(seed):
    from camdp import JointPolicy, augment, check_quasi_positive
    from camdp.equilibrium import enumerate_sub_policies

    m = random_camdp(GeneratorSpec(seed=seed))
    for a in enumerate_sub_policies(2, 4):
        for b in enumerate_sub_policies(2, 4):
            assert check_quasi_positive(augment(m, JointPolicy(a, b)))
