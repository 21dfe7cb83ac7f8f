import math

import pytest

from spinkrylov import brute_force_trace, tr_chiral_formula, tr_sublattice_formula

LATTICES = [(2, 1), (3, 1), (6, 1), (2, 2), (3, 2), (4, 2), (3, 3), (4, 3), (5, 2)]


@pytest.mark.parametrize("nx,ny", LATTICES)
def test_sublattice_formula_matches_brute_force_everywhere(nx, ny):
    N = nx * ny
    for nd in range(N + 1):
        assert tr_sublattice_formula(nx, ny, nd) == brute_force_trace(
            "sublattice", nx, ny, nd), (nx, ny, nd)


@pytest.mark.parametrize("nx,ny", LATTICES)
def test_chiral_formula_matches_brute_force(nx, ny):
    N = nx * ny
    for nd in range(N + 1):
        brute = brute_force_trace("chiral", nx, ny, nd)
        if 2 * nd == N:
            assert brute == tr_chiral_formula(nx, ny), (nx, ny)
        else:
            # spin-flip sends n_down -> N - n_down: no fixed configs off S^z=0
            assert brute == 0, (nx, ny, nd)


def test_known_values():
    assert tr_sublattice_formula(8, 2, 8) == 70
    assert tr_sublattice_formula(8, 2, 7) == 0
    assert tr_sublattice_formula(4, 2, 2) == -math.comb(4, 1)
    assert tr_chiral_formula(8, 2) == 256
    assert tr_chiral_formula(4, 4) == 256
    assert tr_chiral_formula(2, 2) == -4
    assert tr_chiral_formula(3, 2) == 0
    assert tr_chiral_formula(2, 3) == 0


def test_full_space_trace_vanishes():
    # sum_nd tr S = tr over the full 2^N space; every even-sublattice site
    # contributes a factor (1 - 1), so the total is identically zero
    for nx, ny in [(4, 2), (3, 3), (5, 2)]:
        assert sum(tr_sublattice_formula(nx, ny, nd)
                   for nd in range(nx * ny + 1)) == 0


def test_extreme_sectors():
    # nd = 0: single all-up config, sign +1
    assert tr_sublattice_formula(6, 2, 0) == 1
    assert brute_force_trace("sublattice", 6, 2, 0) == 1
    # nd = N: sign (-1)^(#even sites)
    assert tr_sublattice_formula(6, 2, 12) == brute_force_trace("sublattice", 6, 2, 12)


def test_brute_force_cap():
    with pytest.raises(ValueError, match="cap"):
        brute_force_trace("sublattice", 8, 2, 8, cap=100)


def test_validation():
    with pytest.raises(ValueError):
        brute_force_trace("parity", 4, 2, 4)
    with pytest.raises(ValueError):
        tr_sublattice_formula(4, 2, 9)
