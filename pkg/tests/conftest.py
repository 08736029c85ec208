import random

import pytest


def seeded_rng(seed: int):
    """Deterministic byte source with the os.urandom call shape."""
    rnd = random.Random(seed)
    return rnd.randbytes


@pytest.fixture
def rng():
    return seeded_rng(0xC0FFEE)
