import numpy as np
import pytest


class StubRng:
    """Deterministic stand-in for a Generator: every normal draw is `value`."""

    def __init__(self, value=0.0):
        self.value = value

    def standard_normal(self, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)


@pytest.fixture
def stub_rng():
    return StubRng
