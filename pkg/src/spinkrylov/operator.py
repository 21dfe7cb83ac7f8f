"""Matrix-free Hamiltonian and symmetry-operator application within a sector.

H = sum_bonds J_b (S^x S^x + S^y S^y) + Delta_b J_b S^z S^z, plus optional
longer-range XX shell terms.  The XX part moves amplitude J/2 between
configurations that differ by one anti-aligned bond; the ZZ part is diagonal,
+-Delta*J/4 per bond depending on alignment.

The matvec uses a gather formulation: each output amplitude is accumulated
from its own in-neighbors in a fixed bond order, so the parallel kernel is
bit-for-bit identical to the serial one regardless of thread count.

Symmetry operators:
  sublattice  S: diagonal sign (-1)^(# down spins on the even sublattice)
  spinflip    X: global spin flip (mask complement)
  inversion   I: site permutation (x,y) -> (nx-1-x, ny-1-y)
  chiral      C = X I S
S anticommutes with any XX Hamiltonian whose bonds all connect the two
sublattices (nearest-neighbor bonds always do); X and I commute with H
for every coupling choice, hence C anticommutes exactly when S does.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import numba
from numba import njit, prange

from .basis import SectorBasis, build_sector_basis, rank
from .lattice import inversion_map


# ---------------------------------------------------------------- state type

@dataclass
class StateVector:
    basis: SectorBasis
    amps: np.ndarray

    def __post_init__(self):
        if self.amps.shape != (self.basis.size,):
            raise ValueError(
                f"amplitude array has shape {self.amps.shape}, sector size is {self.basis.size}")

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def copy(self):
        return StateVector(self.basis, self.amps.copy())


def _check_same_sector(basis, v):
    if not basis.same_sector(v.basis):
        raise ValueError(
            f"basis mismatch: vector lives in ({v.basis.n_sites}, {v.basis.n_down}), "
            f"operator applied over ({basis.n_sites}, {basis.n_down})")


# ------------------------------------------------------------- hamiltonian

@dataclass
class HamiltonianSpec:
    lattice: object
    include_xx: bool = True
    include_zz: bool = True
    # precomputed term arrays (set in build_hamiltonian)
    xx_pair_masks: np.ndarray = field(default=None, repr=False)
    xx_amps: np.ndarray = field(default=None, repr=False)
    xx_same_sublattice: np.ndarray = field(default=None, repr=False)
    zz_pair_masks: np.ndarray = field(default=None, repr=False)
    zz_amps: np.ndarray = field(default=None, repr=False)

    @property
    def is_chiral(self):
        """True iff the sublattice sign operator anticommutes with H exactly:
        no active ZZ term and no active same-sublattice XX bond."""
        if self.zz_amps.size and np.any(self.zz_amps != 0.0):
            return False
        active = self.xx_amps != 0.0
        return not np.any(self.xx_same_sublattice & active)

    def norm_bound(self):
        """Cheap upper bound on ||H|| (max row sum over any sector)."""
        return float(np.sum(np.abs(self.xx_amps)) + np.sum(np.abs(self.zz_amps)))


def build_hamiltonian(lattice, include_xx=True, include_zz=True):
    xx_masks, xx_amps, xx_same = [], [], []
    if include_xx:
        for a, b, j, same in lattice.xx_bond_terms():
            xx_masks.append((1 << a) | (1 << b))
            xx_amps.append(0.5 * j)
            xx_same.append(same)
    zz_masks, zz_amps = [], []
    if include_zz:
        for a, b, dj in lattice.zz_bond_terms():
            zz_masks.append((1 << a) | (1 << b))
            zz_amps.append(0.25 * dj)
    return HamiltonianSpec(
        lattice=lattice, include_xx=include_xx, include_zz=include_zz,
        xx_pair_masks=np.array(xx_masks, dtype=np.uint64),
        xx_amps=np.array(xx_amps, dtype=np.float64),
        xx_same_sublattice=np.array(xx_same, dtype=np.bool_),
        zz_pair_masks=np.array(zz_masks, dtype=np.uint64),
        zz_amps=np.array(zz_amps, dtype=np.float64),
    )


@njit(cache=True, inline="always")
def _find(configs, target):
    lo = 0
    hi = configs.size
    while lo < hi:
        mid = (lo + hi) >> 1
        if configs[mid] < target:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def _matvec_serial(configs, xx_masks, xx_amps, zz_masks, zz_amps, v, out):
    zero = np.uint64(0)
    for k in range(configs.size):
        c = configs[k]
        diag = 0.0
        for t in range(zz_masks.size):
            bits = c & zz_masks[t]
            if bits == zero or bits == zz_masks[t]:
                diag += zz_amps[t]   # aligned bond
            else:
                diag -= zz_amps[t]
        acc = diag * v[k]
        for t in range(xx_masks.size):
            bits = c & xx_masks[t]
            if bits != zero and bits != xx_masks[t]:   # anti-aligned: flips
                acc += xx_amps[t] * v[_find(configs, c ^ xx_masks[t])]
        out[k] = acc


@njit(cache=True, parallel=True)
def _matvec_parallel(configs, xx_masks, xx_amps, zz_masks, zz_amps, v, out):
    zero = np.uint64(0)
    for k in prange(configs.size):
        c = configs[k]
        diag = 0.0
        for t in range(zz_masks.size):
            bits = c & zz_masks[t]
            if bits == zero or bits == zz_masks[t]:
                diag += zz_amps[t]
            else:
                diag -= zz_amps[t]
        acc = diag * v[k]
        for t in range(xx_masks.size):
            bits = c & xx_masks[t]
            if bits != zero and bits != xx_masks[t]:
                acc += xx_amps[t] * v[_find(configs, c ^ xx_masks[t])]
        out[k] = acc


def resolve_threads(threads=None):
    """threads: None -> SPINKRYLOV_THREADS env or 1; 0 -> all cores; n -> n."""
    if threads is None:
        threads = int(os.environ.get("SPINKRYLOV_THREADS", "1"))
    threads = int(threads)
    if threads == 0:
        threads = numba.config.NUMBA_DEFAULT_NUM_THREADS
    if threads < 1:
        raise ValueError(f"threads must be >= 0, got {threads}")
    return threads


def matvec(h, basis, amps, out=None, threads=None):
    """w = H v on raw amplitude arrays (float64 or complex128)."""
    if out is None:
        out = np.empty_like(amps)
    nthreads = resolve_threads(threads)
    args = (basis.configs, h.xx_pair_masks, h.xx_amps,
            h.zz_pair_masks, h.zz_amps)
    if nthreads == 1:
        _matvec_serial(*args, amps, out)
    else:
        numba.set_num_threads(nthreads)
        _matvec_parallel(*args, amps, out)
    return out


def apply_hamiltonian(h, basis, v, threads=None):
    _check_same_sector(basis, v)
    return StateVector(v.basis, matvec(h, basis, v.amps, threads=threads))


@njit(cache=True)
def _dense_fill(configs, xx_masks, xx_amps, zz_masks, zz_amps, out):
    zero = np.uint64(0)
    for k in range(configs.size):
        c = configs[k]
        diag = 0.0
        for t in range(zz_masks.size):
            bits = c & zz_masks[t]
            if bits == zero or bits == zz_masks[t]:
                diag += zz_amps[t]
            else:
                diag -= zz_amps[t]
        out[k, k] = diag
        for t in range(xx_masks.size):
            bits = c & xx_masks[t]
            if bits != zero and bits != xx_masks[t]:
                out[k, _find(configs, c ^ xx_masks[t])] += xx_amps[t]


def assemble_dense(h, basis, cap=20000):
    """Dense symmetric matrix of H over the sector; refuses above `cap`."""
    if basis.size > cap:
        raise ValueError(
            f"sector size {basis.size} exceeds dense cap {cap}; "
            "use the matrix-free path (krylov module)")
    out = np.zeros((basis.size, basis.size), dtype=np.float64)
    _dense_fill(basis.configs, h.xx_pair_masks, h.xx_amps,
                h.zz_pair_masks, h.zz_amps, out)
    return out


# ------------------------------------------------------------- symmetries

@njit(cache=True)
def _sublattice_signs_kernel(configs, even_mask, out):
    one = np.uint64(1)
    for k in range(configs.size):
        m = (~configs[k]) & even_mask   # down spins on even sites
        cnt = 0
        while m != np.uint64(0):
            m &= m - one
            cnt += 1
        out[k] = 1 - 2 * (cnt & 1)


def sublattice_signs(lattice, basis):
    """(-1)^(# down spins on the even sublattice) for every config, int8."""
    out = np.empty(basis.size, dtype=np.int8)
    _sublattice_signs_kernel(basis.configs, lattice.even_sublattice_mask, out)
    return out


@njit(cache=True)
def _permute_masks_kernel(configs, perm, n_sites, out):
    one = np.uint64(1)
    for k in range(configs.size):
        c = configs[k]
        m = np.uint64(0)
        for i in range(n_sites):
            if c & (one << np.uint64(i)):
                m |= one << np.uint64(perm[i])
        out[k] = m


@njit(cache=True)
def _scatter_by_search(configs_img, masks, amps, out):
    for k in range(masks.size):
        out[_find(configs_img, masks[k])] = amps[k]


def apply_symmetry(lattice, which, basis, v):
    """Apply one of {sublattice, spinflip, inversion, chiral} to v.

    spinflip and chiral map the sector (n_down) to (N - n_down); when these
    differ the returned StateVector lives over the image sector's basis.
    """
    _check_same_sector(basis, v)
    if which == "sublattice":
        return StateVector(v.basis, v.amps * sublattice_signs(lattice, basis))
    if which == "inversion":
        perm = inversion_map(lattice)
        masks = np.empty(basis.size, dtype=np.uint64)
        _permute_masks_kernel(basis.configs, perm, lattice.n_sites, masks)
        out = np.empty_like(v.amps)
        _scatter_by_search(basis.configs, masks, v.amps, out)
        return StateVector(v.basis, out)
    if which == "spinflip":
        img = _image_basis(basis)
        # complement reverses the ascending order within the image sector
        return StateVector(img, v.amps[::-1].copy())
    if which == "chiral":
        s = apply_symmetry(lattice, "sublattice", basis, v)
        i = apply_symmetry(lattice, "inversion", basis, s)
        return apply_symmetry(lattice, "spinflip", basis, i)
    raise ValueError(f"unknown symmetry {which!r}")


def _image_basis(basis):
    if basis.n_down * 2 == basis.n_sites:
        return basis
    return build_sector_basis(basis.n_sites, basis.n_sites - basis.n_down)


# ------------------------------------------------------------- product states

def mask_from_pattern(pattern):
    """Bitmask from a per-site pattern ('u'/'d' string or iterable, site order)."""
    m = 0
    for i, s in enumerate(pattern):
        if s in ("u", "U", 1, "1", "up"):
            m |= 1 << i
        elif s not in ("d", "D", 0, "0", "down"):
            raise ValueError(f"unrecognized spin {s!r} at site {i}")
    return m


def build_product_state(pattern, basis=None, dtype=np.float64):
    """Unit StateVector for an S^z product state given per-site spins."""
    pattern = list(pattern)
    n_sites = len(pattern)
    m = mask_from_pattern(pattern)
    n_down = n_sites - int(m).bit_count()
    if basis is None:
        basis = build_sector_basis(n_sites, n_down)
    elif basis.n_sites != n_sites or basis.n_down != n_down:
        raise ValueError(
            f"pattern has ({n_sites}, {n_down}), basis is "
            f"({basis.n_sites}, {basis.n_down})")
    amps = np.zeros(basis.size, dtype=dtype)
    amps[rank(basis, m)] = 1.0
    return StateVector(basis, amps)


def domain_wall_pattern(nx, ny):
    """Single-wall pattern: columns x < nx/2 all up, the rest all down."""
    return "".join("u" if x < nx // 2 else "d" for x in range(nx) for _ in range(ny))
