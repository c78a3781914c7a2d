import numpy as np
import pytest

from lfht_lab.dist import DiscretePmf, SampleKind, SampleSet, Source, make_discrete_pmf
from lfht_lab.rng import generator


@pytest.fixture
def rng():
    return generator(1234)


def random_pmf(rng: np.random.Generator, k: int, floor: float = 0.0) -> DiscretePmf:
    return make_discrete_pmf(rng.random(k) + floor)


def discrete_sample(obs, k: int, source: Source = Source.X) -> SampleSet:
    return SampleSet(
        source=source,
        kind=SampleKind.DISCRETE,
        dim=k,
        observations=np.asarray(obs, dtype=np.int64),
    )
