import numpy as np
import pytest
from hypothesis import settings

from ris_hopforge.channel import ChannelRealization

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_channel(rng, M, K, ris_sizes=()):
    """Unit-scale channel with arbitrary dimensions (no geometry)."""
    H, prev = [], M
    for n in ris_sizes:
        H.append(random_complex(rng, n, prev))
        prev = n
    g = [random_complex(rng, prev) for _ in range(K)] if ris_sizes else []
    w = [random_complex(rng, M) for _ in range(K)]
    return ChannelRealization(tuple(H), tuple(g), tuple(w))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
