"""Random model generation for Monte Carlo studies.

Sampling uses numpy's PCG64 bit generator seeded directly with the 64-bit
seed, so a (seed, dims, reward_min) triple always yields the same model.
"""

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from .evaluation import check_quasi_positive
from .model import CamdpError, FactoredCamdp, JointPolicy, augment

RNG_NAME = "numpy.PCG64"
MAX_RETRIES = 100
#: Above this many joint policies, ergodicity is only checked via strict positivity.
EXHAUSTIVE_CHECK_CAP = 4096


class GenerationError(CamdpError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    dims: tuple = (2, 2, 2, 2, 2)
    seed: int = 0
    reward_min: float = 0.01
    transition_law: str = "uniform-simplex"
    reward_law: str = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.dims) != 5 or min(self.dims) < 1:
            raise ValueError(f"dims must be five positive counts (ns0, nss, ns1, na0, na1), got {self.dims}")
        if not 0.0 < self.reward_min < 1.0:
            raise ValueError("reward_min must lie in (0, 1)")
        if self.transition_law != "uniform-simplex" or self.reward_law != "uniform":
            raise ValueError("only the uniform-simplex / uniform laws are implemented")

    def with_seed(self, seed):
        return GeneratorSpec(self.dims, seed, self.reward_min, self.transition_law, self.reward_law)

    def as_dict(self):
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["rng"] = RNG_NAME
        return d


def _simplex_rows(rng, shape):
    # 1 - U lies in (0, 1], so every probability is strictly positive
    x = 1.0 - rng.random(shape)
    return x / x.sum(axis=-1, keepdims=True)


def _rewards(rng, shape, reward_min):
    return reward_min + (1.0 - reward_min) * (1.0 - rng.random(shape))


def _sample(rng, spec):
    ns0, nss, ns1, na0, na1 = spec.dims
    p0 = _simplex_rows(rng, (na0, ns0, ns0))
    ps = _simplex_rows(rng, (na0, na1, nss, nss))
    p1 = _simplex_rows(rng, (na1, ns1, ns1))
    r0 = _rewards(rng, (na0, ns0, ns0), spec.reward_min)
    rs = _rewards(rng, (na0, na1, nss, nss), spec.reward_min)
    r1 = _rewards(rng, (na1, ns1, ns1), spec.reward_min)
    return FactoredCamdp.from_arrays(p0, ps, p1, r0, rs, r1, renormalize=False)


def all_policies_quasi_positive(model):
    """True if every joint policy yields an irreducible, aperiodic chain."""
    if all(np.all(getattr(model, k) > 0) for k in ("p0", "ps", "p1")):
        return True
    if model.n_policies0 * model.n_policies1 > EXHAUSTIVE_CHECK_CAP:
        return False
    for pi0 in itertools.product(range(model.na0), repeat=model.n_cells0):
        for pi1 in itertools.product(range(model.na1), repeat=model.n_cells1):
            if not check_quasi_positive(augment(model, JointPolicy(pi0, pi1))):
                return False
    return True


def random_camdp(spec):
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    for _ in range(MAX_RETRIES):
        model = _sample(rng, spec)
        if model.is_valid and all_policies_quasi_positive(model):
            return model
    raise GenerationError(f"no ergodic model after {MAX_RETRIES} draws for seed {spec.seed}")
