"""Free-fermion oracle: the XX chain as nearest-neighbor tight binding.

For ny = 1 a Jordan-Wigner transformation maps the spin-1/2 XX chain exactly
onto free fermions with hopping J/2 (occupied site = spin up, m_i = n_i - 1/2),
so this module supplies closed-form dynamics to test the many-body code
against.  For ny >= 2 it is deliberately NOT the spin model -- hard-core
bosons and free fermions part ways there -- and serves as the contrast case:
an initial state filling whole columns evolves with densities completely
independent of the rung hopping.

Only nearest-neighbor bonds enter the hopping matrix; longer-range XX
perturbations acquire Jordan-Wigner strings and are out of scope here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import build_lattice

HERMITICITY_TOL = 1e-12
OCCUPATION_TOL = 1e-10


@dataclass
class SingleParticleSystem:
    lattice: object
    h: np.ndarray               # (N, N) real symmetric, zero diagonal


@dataclass
class CorrelationMatrix:
    matrix: np.ndarray          # (N, N) complex Hermitian, C_ij = <f_i^dag f_j>

    @property
    def n_sites(self):
        return self.matrix.shape[0]

    def particle_number(self):
        return float(np.real(np.trace(self.matrix)))


def hopping_matrix(lattice):
    """Single-particle Hamiltonian with J_parallel/2, J_perp/2 on nn bonds."""
    n = lattice.n_sites
    h = np.zeros((n, n))
    for bond in lattice.bonds_parallel:
        h[bond.site_a, bond.site_b] = h[bond.site_b, bond.site_a] = lattice.j_par / 2
    for bond in lattice.bonds_perp:
        h[bond.site_a, bond.site_b] = h[bond.site_b, bond.site_a] = lattice.j_perp / 2
    return SingleParticleSystem(lattice=lattice, h=h)


def dispersion_spectrum(nx, ny, j_par=1.0, j_perp=1.0):
    """Sorted eigenvalues of the hard-wall hopping matrix."""
    lat = build_lattice(nx, ny, j_par=j_par, j_perp=j_perp)
    return np.sort(np.linalg.eigvalsh(hopping_matrix(lat).h))


def dispersion_formula(nx, ny, j_par=1.0, j_perp=1.0):
    """Sorted multiset J_par cos(k_x) + J_perp cos(k_y) on the open-boundary
    grid k_j = n_j pi / (N_j + 1), n_j = 1..N_j."""
    kx = np.arange(1, nx + 1) * np.pi / (nx + 1)
    ky = np.arange(1, ny + 1) * np.pi / (ny + 1)
    eps = j_par * np.cos(kx)[:, None] + j_perp * np.cos(ky)[None, :]
    return np.sort(eps.ravel())


def column_filled_initial(lattice, columns):
    """Diagonal projector filling every site of the given columns."""
    cols = sorted(set(columns))
    if cols and not (0 <= cols[0] and cols[-1] < lattice.nx):
        raise ValueError(f"columns must lie in 0..{lattice.nx - 1}")
    diag = np.zeros(lattice.n_sites)
    for x in cols:
        for y in range(lattice.ny):
            diag[lattice.site_index(x, y)] = 1.0
    return CorrelationMatrix(np.diag(diag).astype(np.complex128))


def occupied_sites_initial(lattice, pattern):
    """Projector onto the up ('u') sites of a per-site pattern string."""
    if len(pattern) != lattice.n_sites:
        raise ValueError("pattern length must equal the site count")
    diag = np.array([1.0 if ch == "u" else 0.0 for ch in pattern])
    return CorrelationMatrix(np.diag(diag).astype(np.complex128))


def _check_correlation(c):
    m = c.matrix
    if not np.allclose(m, m.conj().T, rtol=0, atol=HERMITICITY_TOL):
        raise ValueError("correlation matrix is not Hermitian")
    occ = np.linalg.eigvalsh(m)
    if occ.min() < -OCCUPATION_TOL or occ.max() > 1 + OCCUPATION_TOL:
        raise ValueError(f"occupation spectrum [{occ.min():.3g}, {occ.max():.3g}] "
                         "outside [0, 1]")


def correlation_evolve(system, c0, t):
    """C(t) = U^dag C(0) U with U = exp(-i h t), via eigendecomposition of h."""
    _check_correlation(c0)
    w, s = np.linalg.eigh(system.h)
    phases = np.exp(-1j * w * t)
    u = (s * phases) @ s.T.conj()          # h real symmetric -> s real, still safe
    return CorrelationMatrix(u.conj().T @ c0.matrix @ u)


def densities(corr):
    """Site occupations n_i = C_ii (real part; imaginary part is roundoff)."""
    return np.real(np.diag(corr.matrix)).copy()


def site_magnetization(corr):
    """Jordan-Wigner spin map m_i = n_i - 1/2."""
    return densities(corr) - 0.5
