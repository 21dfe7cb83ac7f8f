"""Fixed-magnetization sector enumeration and combinatorial ranking.

A spin configuration is a bitmask with bit i set for spin-up at site i.  The
sector with n_down down spins on n_sites sites contains the C(n_sites, n_down)
masks with popcount = n_sites - n_down, stored in ascending numeric order.
Ascending mask order coincides with the colexicographic order of the set-bit
position tuples, so the rank of a mask is available in closed form from the
combinatorial number system -- no search needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


def _comb_table(n_max=64):
    t = np.zeros((n_max + 1, n_max + 1), dtype=np.int64)
    for n in range(n_max + 1):
        t[n, 0] = 1
        for k in range(1, n + 1):
            t[n, k] = t[n - 1, k - 1] + t[n - 1, k]
    return t


_COMB = _comb_table()


@njit(cache=True)
def _fill_sector(configs, x0):
    """Enumerate equal-popcount masks ascending from x0 (Gosper's hack)."""
    one = np.uint64(1)
    two = np.uint64(2)
    x = x0
    for k in range(configs.size):
        configs[k] = x
        if k + 1 < configs.size:
            u = x & (~x + one)        # lowest set bit
            v = x + u
            x = v + (((v ^ x) // u) >> two)
    return configs


@njit(cache=True)
def _rank_kernel(mask, comb):
    """Colex rank of a mask among equal-popcount masks: sum_t C(p_t, t)."""
    r = np.int64(0)
    t = 0
    m = mask
    one = np.uint64(1)
    p = 0
    while m != np.uint64(0):
        if m & one:
            t += 1
            r += comb[p, t]
        m >>= one
        p += 1
    return r


@dataclass
class SectorBasis:
    n_sites: int
    n_down: int
    configs: np.ndarray  # uint64, ascending

    @property
    def size(self):
        return self.configs.size

    @property
    def n_up(self):
        return self.n_sites - self.n_down

    @property
    def sz(self):
        """Total S^z of the sector (in units of hbar)."""
        return (self.n_up - self.n_down) / 2.0

    def unrank(self, k):
        return self.configs[k]

    def same_sector(self, other):
        return self.n_sites == other.n_sites and self.n_down == other.n_down


def build_sector_basis(n_sites, n_down):
    if not (0 <= n_down <= n_sites <= 64):
        raise ValueError(
            f"need 0 <= n_down <= n_sites <= 64, got n_down={n_down}, n_sites={n_sites}")
    dim = math.comb(n_sites, n_down)
    if dim > np.iinfo(np.int64).max:
        raise OverflowError(f"sector size {dim} exceeds int64 indexing")
    configs = np.empty(dim, dtype=np.uint64)
    n_up = n_sites - n_down
    _fill_sector(configs, np.uint64((1 << n_up) - 1))  # python int: no overflow
    return SectorBasis(n_sites=n_sites, n_down=n_down, configs=configs)


def rank(basis, config):
    """Index of `config` in the ascending sector order, O(n_sites), no search."""
    config = int(config)
    if config.bit_count() != basis.n_up:
        raise ValueError(
            f"config has {config.bit_count()} up spins, sector expects {basis.n_up}")
    if config >> basis.n_sites:
        raise ValueError(f"config {config:#x} uses bits beyond site {basis.n_sites - 1}")
    return int(_rank_kernel(np.uint64(config), _COMB))
