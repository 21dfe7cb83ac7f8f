import numpy as np
import pytest

from spinkrylov import build_hamiltonian, build_lattice, build_sector_basis


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def ladder_4x2():
    """4x2 XX ladder at J_perp = J_par with its S^z = 0 sector."""
    lat = build_lattice(4, 2)
    basis = build_sector_basis(8, 4)
    return lat, basis, build_hamiltonian(lat)


def random_sector_state(basis, rng, dtype=np.float64):
    v = rng.normal(size=basis.size).astype(dtype)
    if np.iscomplexobj(np.zeros(1, dtype)):
        v = v + 1j * rng.normal(size=basis.size)
    return v / np.linalg.norm(v)
