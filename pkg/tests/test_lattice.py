import numpy as np
import pytest

from spinkrylov import build_lattice, inversion_map, neighbor_shell, squared_distances


def test_site_indexing_is_column_major():
    lat = build_lattice(4, 2)
    assert lat.n_sites == 8
    assert lat.site_index(0, 0) == 0
    assert lat.site_index(0, 1) == 1
    assert lat.site_index(3, 1) == 7
    assert lat.site_xy(5) == (2, 1)


def test_bond_counts_open_boundaries():
    lat = build_lattice(5, 3)
    assert len(lat.bonds_parallel) == 4 * 3      # (nx-1)*ny
    assert len(lat.bonds_perp) == 5 * 2          # nx*(ny-1)
    lat1 = build_lattice(6, 1)
    assert len(lat1.bonds_parallel) == 5
    assert lat1.bonds_perp == []


def test_every_nn_bond_joins_opposite_sublattices():
    lat = build_lattice(5, 4)
    for b in lat.bonds_parallel + lat.bonds_perp:
        assert not b.same_sublattice


def test_squared_distances_ladder():
    # nx x 2 ladder: d^2 takes 1, 2, 4, 5, 9, 10, ... (no 3, 6, 7, 8)
    d2 = squared_distances(8, 2)
    assert d2[:6] == [1, 2, 4, 5, 9, 10]


def test_shell_table_ladder():
    """Shells 2..5 of the two-leg ladder: diagonal, 2-leg, knight, 3-leg."""
    lat = build_lattice(8, 2)
    expected = {2: (2, True), 3: (4, True), 4: (5, False), 5: (9, False)}
    for n, (d2, same) in expected.items():
        bonds = neighbor_shell(lat, n)
        assert bonds, f"shell {n} empty"
        for b in bonds:
            xa, ya = lat.site_xy(b.site_a)
            xb, yb = lat.site_xy(b.site_b)
            assert (xa - xb) ** 2 + (ya - yb) ** 2 == d2
            assert b.same_sublattice == same


def test_same_sublattice_iff_even_squared_distance():
    lat = build_lattice(6, 4)
    for n in range(2, 8):
        for b in neighbor_shell(lat, n):
            xa, ya = lat.site_xy(b.site_a)
            xb, yb = lat.site_xy(b.site_b)
            d2 = (xa - xb) ** 2 + (ya - yb) ** 2
            assert b.same_sublattice == (d2 % 2 == 0)


def test_shell_out_of_range_message_names_maximum():
    lat = build_lattice(3, 2)
    with pytest.raises(ValueError, match="shell"):
        neighbor_shell(lat, 99)


def test_shell_perturbations_enter_xx_terms():
    lat = build_lattice(6, 2, shell_perturbations=((2, 0.3), (4, 0.1)))
    kinds = {}
    for a, b, amp, same in lat.xx_bond_terms():
        kinds.setdefault(round(abs(amp), 12), 0)
        kinds[round(abs(amp), 12)] += 1
    # raw couplings: J on nn bonds, delta_J on each perturbed shell
    assert 1.0 in kinds and 0.3 in kinds and 0.1 in kinds


def test_zz_terms_are_nearest_neighbor_only():
    lat = build_lattice(4, 2, delta_par=0.5, delta_perp=0.25,
                        shell_perturbations=((2, 0.3),))
    terms = list(lat.zz_bond_terms())
    assert len(terms) == len(lat.bonds_parallel) + len(lat.bonds_perp)


def test_inversion_map_is_an_involution():
    lat = build_lattice(5, 3)
    perm = inversion_map(lat)
    assert np.array_equal(perm[perm], np.arange(lat.n_sites))
    # center site of an odd x odd lattice is fixed
    assert perm[lat.site_index(2, 1)] == lat.site_index(2, 1)


def test_even_sublattice_mask():
    lat = build_lattice(3, 2)
    mask = int(lat.even_sublattice_mask)
    for i in range(6):
        x, y = lat.site_xy(i)
        assert bool(mask >> i & 1) == ((x + y) % 2 == 0)


def test_build_lattice_validation():
    with pytest.raises(ValueError):
        build_lattice(0, 2)
    with pytest.raises(ValueError):
        build_lattice(33, 2)          # 66 sites > 64-bit masks
    with pytest.raises(ValueError):
        build_lattice(4, 2, shell_perturbations=((1, 0.1),))
