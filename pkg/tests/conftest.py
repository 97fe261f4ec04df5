import numpy as np
import pytest

from geomstates import build_basis


@pytest.fixture(scope="session")
def basis2():
    return build_basis(2)


@pytest.fixture(scope="session")
def basis3():
    return build_basis(3)


@pytest.fixture(scope="session")
def basis4():
    return build_basis(4)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, n, traceless=False):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    M = 0.5 * (M + M.conj().T)
    if traceless:
        M = M - (np.trace(M) / n) * np.eye(n)
    return M


def random_state_coords(rng, basis, scale=0.6):
    """Random interior state coordinates: mix a random pure state with I/n."""
    n = basis.n
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v = v / np.linalg.norm(v)
    rho = scale * np.outer(v, v.conj()) + (1.0 - scale) * np.eye(n) / n
    from geomstates import state_from_matrix

    return state_from_matrix(rho, basis)
