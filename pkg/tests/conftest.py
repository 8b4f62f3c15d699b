import os

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from symring.groups import FreeContext
from symring.oracles import builtin

# deterministic example streams keep test_output.txt reproducible
settings.register_profile("repo", derandomize=True, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


@pytest.fixture(scope="session")
def F2():
    return FreeContext.free("a b")


@pytest.fixture(scope="session")
def F3():
    return FreeContext.free("a b c")


def free_words(rank, max_len=8):
    """Raw syllable lists over a free context of the given rank."""
    syl = st.tuples(st.integers(0, rank - 1), st.integers(-3, 3).filter(bool))
    return st.lists(syl, max_size=max_len)


def fp_words(oracle, copies, max_len=8):
    syl = st.tuples(st.integers(0, copies - 1), st.integers(0, oracle.order - 1))
    return st.lists(syl, max_size=max_len)


@pytest.fixture(scope="session")
def z2():
    return builtin("Z/2")


@pytest.fixture(scope="session")
def s3():
    return builtin("S3")
