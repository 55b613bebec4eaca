import random

import pytest

from mixroute.group import get_group


@pytest.fixture
def rng():
    return random.Random(0xA5A5)


@pytest.fixture
def tgroup():
    """Fast test-mode group used by most protocol tests."""
    return get_group("schnorr256")


@pytest.fixture(params=["schnorr256", "secp256k1"])
def any_group(request):
    return get_group(request.param)
