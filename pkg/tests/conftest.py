from fractions import Fraction

import pytest

from fairknap.core import Allocation
from fairknap.forge import tightness_instance


@pytest.fixture
def tight():
    return tightness_instance(Fraction(1, 10))


@pytest.fixture
def tight_alloc():
    # the allocation the tightness table reports: A1={g1,g3}, A2={g2}, charity empty
    return Allocation((frozenset({0, 2}), frozenset({1}), frozenset()))
