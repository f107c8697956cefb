import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from advpred.core import LabelSequence, MixedStrategy, TagAlphabet
from advpred.core import AlignmentPotentials, ChainPotentials

settings.register_profile(
    "deterministic",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")


def random_mix(alphabet: TagAlphabet, n: int, rng, max_support: int = 5) -> MixedStrategy:
    m = len(alphabet)
    k = int(rng.integers(1, min(max_support, m**n) + 1))
    seen, support = set(), []
    while len(support) < k:
        tags = tuple(int(x) for x in rng.integers(0, m, n))
        if tags not in seen:
            seen.add(tags)
            support.append(LabelSequence(tags, alphabet))
    return MixedStrategy.normalized(support, rng.random(k) + 0.01)


def random_chain_psi(n: int, m: int, rng, scale: float = 1.0) -> ChainPotentials:
    return ChainPotentials(
        rng.uniform(-scale, scale, (n, m)),
        rng.uniform(-scale, scale, m),
        rng.uniform(-scale, scale, (n - 1, m, m)) if n > 1 else np.zeros((0, m, m)),
    )


def random_align_psi(n: int, rng, scale: float = 1.0) -> AlignmentPotentials:
    return AlignmentPotentials(rng.uniform(-scale, scale, n), rng.uniform(-scale, scale, n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
