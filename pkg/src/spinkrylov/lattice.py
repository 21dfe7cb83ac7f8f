"""Rectangular-lattice geometry: site indexing, hard-wall bonds, neighbor shells.

Sites live on an nx * ny grid with open (hard-wall) boundaries and are indexed
i = x * ny + y, so a left/right cut at column x0 splits the bitmask of a spin
configuration into contiguous low/high bit ranges.  The whole lattice must fit
a single 64-bit configuration word.

Couplings: J_par along x ("legs"), J_perp along y ("rungs"), Ising anisotropies
Delta_par / Delta_perp on the same bonds, plus optional longer-range XX "shell"
terms.  Shell n is the set of site pairs at the n-th smallest distinct squared
Euclidean distance realized on the finite lattice; whether a shell couples the
two checkerboard sublattices or not is geometry, recorded per bond.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_SITES = 64


@dataclass(frozen=True)
class Bond:
    site_a: int
    site_b: int
    kind: str  # "xx_parallel", "xx_perp", or "shell(n)"
    same_sublattice: bool


@dataclass
class LatticeSpec:
    nx: int
    ny: int
    j_par: float = 1.0
    j_perp: float = 1.0
    delta_par: float = 0.0
    delta_perp: float = 0.0
    shell_perturbations: tuple = ()  # ((n, strength), ...) with n >= 2
    bonds_parallel: list = field(default_factory=list)
    bonds_perp: list = field(default_factory=list)
    shell_bonds: dict = field(default_factory=dict)  # n -> [Bond]

    @property
    def n_sites(self):
        return self.nx * self.ny

    def site_index(self, x, y):
        return x * self.ny + y

    def site_xy(self, i):
        return divmod(i, self.ny)

    @property
    def even_sublattice_mask(self):
        """Bitmask of sites with (x + y) even."""
        m = 0
        for i in range(self.n_sites):
            x, y = self.site_xy(i)
            if (x + y) % 2 == 0:
                m |= 1 << i
        return np.uint64(m)

    def xx_bond_terms(self):
        """All active XX bonds as (site_a, site_b, J, same_sublattice) tuples.

        Nearest-neighbor bonds carry j_par / j_perp; shell bonds carry the
        configured perturbation strength.
        """
        terms = []
        for b in self.bonds_parallel:
            terms.append((b.site_a, b.site_b, self.j_par, b.same_sublattice))
        for b in self.bonds_perp:
            terms.append((b.site_a, b.site_b, self.j_perp, b.same_sublattice))
        for n, dj in self.shell_perturbations:
            for b in self.shell_bonds[n]:
                terms.append((b.site_a, b.site_b, dj, b.same_sublattice))
        return terms

    def zz_bond_terms(self):
        """Active ZZ bonds as (site_a, site_b, Delta*J) tuples (nn bonds only)."""
        terms = []
        if self.delta_par != 0.0:
            for b in self.bonds_parallel:
                terms.append((b.site_a, b.site_b, self.delta_par * self.j_par))
        if self.delta_perp != 0.0:
            for b in self.bonds_perp:
                terms.append((b.site_a, b.site_b, self.delta_perp * self.j_perp))
        return terms


def _same_sublattice(lat, a, b):
    xa, ya = lat.site_xy(a)
    xb, yb = lat.site_xy(b)
    return (xa + ya) % 2 == (xb + yb) % 2


def squared_distances(nx, ny):
    """Sorted distinct squared Euclidean distances realized on the lattice."""
    dists = set()
    for dx in range(nx):
        for dy in range(ny):
            if dx == 0 and dy == 0:
                continue
            dists.add(dx * dx + dy * dy)
    return sorted(dists)


def neighbor_shell(lattice, n):
    """Bonds of the n-th neighbor shell (n = 1 is nearest neighbors).

    The shell is defined by the n-th smallest distinct squared distance that
    actually occurs on the finite lattice.  Raises ValueError when fewer than
    n distinct distances exist.
    """
    if n < 1:
        raise ValueError(f"shell index must be >= 1, got {n}")
    dists = squared_distances(lattice.nx, lattice.ny)
    if n > len(dists):
        raise ValueError(
            f"lattice {lattice.nx}x{lattice.ny} realizes only {len(dists)} "
            f"distinct distances; max shell is {len(dists)}"
        )
    d2 = dists[n - 1]
    bonds = []
    N = lattice.n_sites
    for a in range(N):
        xa, ya = lattice.site_xy(a)
        for b in range(a + 1, N):
            xb, yb = lattice.site_xy(b)
            if (xa - xb) ** 2 + (ya - yb) ** 2 == d2:
                bonds.append(Bond(a, b, f"shell({n})", _same_sublattice(lattice, a, b)))
    return bonds


def inversion_map(lattice):
    """Site permutation of the lattice inversion (x, y) -> (nx-1-x, ny-1-y).

    An involution; maps the even sublattice onto itself iff nx and ny are
    both even (then nx-1 + ny-1 is even and (x+y) parity is preserved).
    """
    perm = np.empty(lattice.n_sites, dtype=np.int64)
    for i in range(lattice.n_sites):
        x, y = lattice.site_xy(i)
        perm[i] = lattice.site_index(lattice.nx - 1 - x, lattice.ny - 1 - y)
    return perm


def build_lattice(nx, ny, j_par=1.0, j_perp=1.0, delta_par=0.0, delta_perp=0.0,
                  shell_perturbations=()):
    """Construct a LatticeSpec with populated bond lists.

    shell_perturbations: iterable of (n, strength) with shell index n >= 2
    (n = 1 would duplicate the nearest-neighbor model).
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"lattice dimensions must be positive, got {nx}x{ny}")
    if nx * ny > MAX_SITES:
        raise ValueError(
            f"{nx}x{ny} = {nx * ny} sites exceeds the {MAX_SITES}-site limit "
            "(configurations must fit one 64-bit mask)"
        )
    shells = []
    for item in shell_perturbations:
        n, dj = item
        n = int(n)
        if n < 2:
            raise ValueError(f"shell perturbation index must be >= 2, got {n}")
        shells.append((n, float(dj)))

    lat = LatticeSpec(nx=nx, ny=ny, j_par=float(j_par), j_perp=float(j_perp),
                      delta_par=float(delta_par), delta_perp=float(delta_perp),
                      shell_perturbations=tuple(shells))
    for x in range(nx):
        for y in range(ny):
            a = lat.site_index(x, y)
            if x + 1 < nx:
                b = lat.site_index(x + 1, y)
                lat.bonds_parallel.append(
                    Bond(a, b, "xx_parallel", _same_sublattice(lat, a, b)))
            if y + 1 < ny:
                b = lat.site_index(x, y + 1)
                lat.bonds_perp.append(
                    Bond(a, b, "xx_perp", _same_sublattice(lat, a, b)))
    for n, _ in lat.shell_perturbations:
        if n not in lat.shell_bonds:
            lat.shell_bonds[n] = neighbor_shell(lat, n)
    return lat
