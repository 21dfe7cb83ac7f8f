"""Closed-form trace formulas for the symmetry operators and brute-force checks.

tr S over a fixed-magnetization sector and tr C over the S^z = 0 sector are
exact signed integers; their magnitudes lower-bound the zero-energy degeneracy
of any Hamiltonian the respective operator anticommutes with (pair nonzero
eigenvalues E <-> -E and the trace survives only on the kernel).

Formulas (even sublattice = sites with x + y even):

  even N:  tr S = (-1)^(nd/2) C(N/2, nd/2)            nd even
                = 0                                    nd odd
  odd  N:  tr S = (-1)^(nd/2) C((N-1)/2, nd/2)        nd even
                = (-1)^((nd+1)/2) C((N-1)/2, (nd-1)/2) nd odd

  tr C (at nd = N/2) = (-1)^(N/4) 2^(N/2)   nx, ny both even
                     = 0                     otherwise

Everything uses exact big-integer arithmetic; the brute-force companions sum
signs over sector bitmasks and exist purely as oracles for the formulas.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .basis import build_sector_basis
from .lattice import build_lattice, inversion_map


def tr_sublattice_formula(nx, ny, n_down):
    N = nx * ny
    if not 0 <= n_down <= N:
        raise ValueError(f"n_down={n_down} outside 0..{N}")
    nd = n_down
    if N % 2 == 0:
        if nd % 2:
            return 0
        return (-1) ** (nd // 2) * math.comb(N // 2, nd // 2)
    if nd % 2 == 0:
        return (-1) ** (nd // 2) * math.comb((N - 1) // 2, nd // 2)
    return (-1) ** ((nd + 1) // 2) * math.comb((N - 1) // 2, (nd - 1) // 2)


def tr_chiral_formula(nx, ny):
    """tr C over the S^z = 0 sector (the only sector contributing)."""
    if nx % 2 or ny % 2:
        return 0
    N = nx * ny
    return (-1) ** (N // 4) * 2 ** (N // 2)


@njit(cache=True)
def _popcount(m):
    one = np.uint64(1)
    cnt = 0
    while m != np.uint64(0):
        m &= m - one
        cnt += 1
    return cnt


@njit(cache=True)
def _trace_sublattice(configs, even_mask):
    acc = np.int64(0)
    for k in range(configs.size):
        nd_even = _popcount((~configs[k]) & even_mask)
        acc += 1 - 2 * (nd_even & 1)
    return acc


@njit(cache=True)
def _trace_chiral(configs, even_mask, perm, n_sites, full_mask):
    """Sum of sublattice signs over configs fixed by spin-flip o inversion."""
    one = np.uint64(1)
    acc = np.int64(0)
    for k in range(configs.size):
        c = configs[k]
        m = np.uint64(0)
        for i in range(n_sites):
            if c & (one << np.uint64(i)):
                m |= one << np.uint64(perm[i])
        if (m ^ full_mask) == c:
            nd_even = _popcount((~c) & even_mask)
            acc += 1 - 2 * (nd_even & 1)
    return acc


def brute_force_trace(operator, nx, ny, n_down, cap=10_000_000):
    """Exact sector trace of S or C by direct summation over bitmasks."""
    N = nx * ny
    dim = math.comb(N, n_down)
    if dim > cap:
        raise ValueError(f"sector size {dim} exceeds brute-force cap {cap}")
    lat = build_lattice(nx, ny)
    basis = build_sector_basis(N, n_down)
    even_mask = lat.even_sublattice_mask
    if operator == "sublattice":
        return int(_trace_sublattice(basis.configs, even_mask))
    if operator == "chiral":
        perm = inversion_map(lat)
        full_mask = np.uint64((1 << N) - 1)
        return int(_trace_chiral(basis.configs, even_mask, perm, N, full_mask))
    raise ValueError(f"unknown operator {operator!r}; use 'sublattice' or 'chiral'")
