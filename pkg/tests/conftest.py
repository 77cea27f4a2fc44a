import pytest

from stochres import build_invariant_law, ou_law


@pytest.fixture(scope="session")
def ou():
    return ou_law()


@pytest.fixture(scope="session")
def ou_numeric(ou):
    # same noise, stationary law rebuilt from the coefficients by quadrature
    return build_invariant_law(ou.spec)
