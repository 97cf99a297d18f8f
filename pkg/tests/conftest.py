import pytest

from melonheight.dirichlet import H2_PAIRS, compute_constants


@pytest.fixture(scope="session")
def h2_constants():
    return compute_constants(H2_PAIRS, tol=1e-10)


@pytest.fixture(scope="session")
def all_constants():
    from melonheight.asymptotics import needed_pairs

    return compute_constants(needed_pairs(), tol=1e-10)
