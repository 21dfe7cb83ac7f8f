import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinkrylov import build_sector_basis, rank


def test_sector_sizes():
    for n, k in ((8, 4), (12, 6), (10, 0), (10, 10), (7, 3)):
        basis = build_sector_basis(n, k)
        assert basis.size == math.comb(n, k)
        assert basis.n_up == n - k
        assert basis.sz == pytest.approx((basis.n_up - k) / 2)


def test_configs_strictly_ascending():
    basis = build_sector_basis(10, 4)
    assert np.all(np.diff(basis.configs.astype(np.int64)) > 0)


def test_all_configs_have_right_popcount():
    basis = build_sector_basis(9, 5)
    for c in basis.configs:
        assert bin(int(c)).count("1") == 4   # bits count up spins


def test_rank_unrank_roundtrip_exhaustive_small():
    basis = build_sector_basis(8, 3)
    for i in range(basis.size):
        assert rank(basis, basis.unrank(i)) == i


@given(n=st.integers(1, 24), data=st.data())
@settings(max_examples=200, deadline=None)
def test_rank_matches_position_in_sorted_order(n, data):
    k = data.draw(st.integers(0, n))
    basis = build_sector_basis(n, k)
    i = data.draw(st.integers(0, basis.size - 1))
    config = basis.configs[i]
    assert rank(basis, config) == i
    assert basis.unrank(i) == config


def test_single_config_sectors():
    empty = build_sector_basis(6, 6)
    assert empty.size == 1 and int(empty.configs[0]) == 0
    full = build_sector_basis(6, 0)
    assert full.size == 1 and int(full.configs[0]) == 0b111111


def test_largest_supported_sector_is_representable():
    # C(64, 32) must fit the comb table's int64 entries
    basis = build_sector_basis(24, 12)
    assert basis.size == math.comb(24, 12)


def test_rank_rejects_wrong_popcount_and_stray_bits():
    basis = build_sector_basis(6, 3)
    with pytest.raises(ValueError):
        rank(basis, 0b1111)            # wrong popcount
    with pytest.raises(ValueError):
        rank(basis, 0b111 << 10)       # bits outside the lattice


def test_build_sector_basis_validation():
    with pytest.raises(ValueError):
        build_sector_basis(8, 9)
    with pytest.raises(ValueError):
        build_sector_basis(65, 1)
    with pytest.raises(ValueError):
        build_sector_basis(4, -1)
