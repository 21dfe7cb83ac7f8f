import math

import numpy as np
import pytest

from spinkrylov import (TridiagonalData, build_hamiltonian, build_lattice,
                        build_product_state, build_sector_basis,
                        chain_zero_mode, default_fit_window, domain_wall_pattern,
                        double_linear_fit, lanczos_tridiagonalize,
                        power_law_fit, rf_state)
from spinkrylov.operator import StateVector, assemble_dense


def _dw_run(nx, ny, max_steps, j_perp=1.0, **kw):
    lat = build_lattice(nx, ny, j_perp=j_perp)
    h = build_hamiltonian(lat)
    basis = build_sector_basis(nx * ny, nx * ny // 2)
    start = build_product_state(domain_wall_pattern(nx, ny), basis)
    return lanczos_tridiagonalize(h, basis, start, max_steps, **kw)


def test_hopping_law_on_a_single_chain():
    # (2 beta_j / J)^2 = ny * (j - 1), exact until the walls reflect (j <= nx/2 + 1)
    tri = _dw_run(10, 1, 8)
    for j in range(2, 7):
        assert abs(4 * tri.beta(j) ** 2 - (j - 1)) <= 1e-8 * (j - 1)


def test_hopping_law_on_a_ladder():
    tri = _dw_run(6, 2, 6, j_perp=0.0)
    for j in range(2, 5):
        assert abs(4 * tri.beta(j) ** 2 - 2 * (j - 1)) <= 1e-8 * 2 * (j - 1)


def test_alphas_vanish_for_every_product_start(rng):
    lat = build_lattice(4, 2)
    h = build_hamiltonian(lat)
    basis = build_sector_basis(8, 4)
    tol = 1e-10 * h.norm_bound()
    for _ in range(6):
        pattern = "".join(rng.permutation(list("uuuudddd")))
        start = build_product_state(pattern, basis)
        tri = lanczos_tridiagonalize(h, basis, start, 20)
        assert np.abs(tri.alphas).max() <= tol, pattern


def test_mixed_sign_start_rejected(ladder_4x2):
    lat, basis, h = ladder_4x2
    # superpose two product states from opposite sublattice-sign classes:
    # the start is no longer a sign eigenvector and alphas appear
    a = build_product_state("uuuudddd", basis)
    b = build_product_state("uuduuddd", basis)   # one down spin hopped one leg bond
    start = StateVector(basis, (a.amps + b.amps) / math.sqrt(2))
    tri = lanczos_tridiagonalize(h, basis, start, 15)
    assert np.abs(tri.alphas).max() > 1e-3 * h.norm_bound()
    with pytest.raises(ValueError, match="alpha"):
        chain_zero_mode(tri)


def test_breakdown_on_an_exact_eigenstate(ladder_4x2):
    lat, basis, h = ladder_4x2
    scar = rf_state(4, 2)
    tri = lanczos_tridiagonalize(h, basis, scar.state, 10)
    assert tri.breakdown
    assert tri.n_steps == 1
    assert tri.alphas == pytest.approx([0.0], abs=1e-12)


def test_chain_zero_mode_recurrence_synthetic():
    # beta_j = j: c_{2n+1} = c_1 prod (-2l/(2l+1))
    betas = np.arange(2.0, 12.0)     # beta_2 .. beta_11
    tri = TridiagonalData(alphas=np.zeros(11), betas=betas, n_steps=11,
                          breakdown=False, reorthogonalized=True, norm_bound=1.0)
    mode = chain_zero_mode(tri)
    c = mode.coefficients
    assert not mode.truncated
    assert np.linalg.norm(c) == pytest.approx(1.0)
    assert np.all(c[1::2] == 0.0)
    expect = [1.0]
    for n in range(1, 6):
        expect.append(expect[-1] * (-2 * n / (2 * n + 1)))
    assert np.allclose(c[::2] / c[0], expect, rtol=1e-12)


def test_wallis_ratios_on_the_free_chain():
    tri = _dw_run(12, 1, 8)
    mode = chain_zero_mode(tri)
    c = mode.coefficients
    r3 = c[2] / c[0]
    r5 = c[4] / c[0]
    r7 = c[6] / c[0]
    assert r3 == pytest.approx(-math.sqrt(1 / 2), rel=1e-8)
    assert r5 == pytest.approx(math.sqrt(3 / 8), rel=1e-8)
    assert r7 == pytest.approx(-math.sqrt(5 / 16), rel=1e-8)


def test_double_linear_fit_exact_recovery():
    a, b_odd, b_even = 1.0, 2.5, 0.5          # gamma = (1 + 2) / 2 = 1.5
    j = np.arange(2, 42)
    beta_sq = a * j + np.where(j % 2 == 1, b_odd, b_even)
    fit_a, fit_bo, fit_be, gamma = double_linear_fit(np.sqrt(beta_sq), (2, 41))
    assert fit_a == pytest.approx(a, abs=1e-10)
    assert fit_bo == pytest.approx(b_odd, abs=1e-9)
    assert fit_be == pytest.approx(b_even, abs=1e-9)
    assert gamma == pytest.approx(1.5, abs=1e-9)


def test_double_linear_fit_needs_enough_points():
    with pytest.raises(ValueError, match="parity"):
        double_linear_fit(np.sqrt(np.arange(2.0, 12.0)), (2, 9))


def test_power_law_fit_exact_recovery():
    j = np.arange(1, 60)
    c = np.where(j % 2 == 1, j ** -0.25, 0.0)    # |c_j|^2 = j^-0.5
    assert power_law_fit(c, (5, 59)) == pytest.approx(0.5, abs=1e-12)


def test_power_law_fit_validation():
    c = np.array([1.0, 0.0, 0.5, 0.0, 0.0])
    with pytest.raises(ValueError, match="zero coefficient"):
        power_law_fit(c, (1, 5))
    with pytest.raises(ValueError, match="odd"):
        power_law_fit(c, (2, 2))


def test_default_fit_window_caps_and_detects_departure():
    j = np.arange(2, 62)
    clean = np.sqrt(2.0 * j)
    tri = TridiagonalData(alphas=np.zeros(61), betas=clean, n_steps=61,
                          breakdown=False, reorthogonalized=True, norm_bound=1.0)
    assert default_fit_window(tri) == (10, 30)    # capped at n_steps // 2
    bent = clean.copy()
    bent[j >= 26] *= 2.0                          # 4x jump in beta^2 at j = 26
    tri2 = TridiagonalData(alphas=np.zeros(61), betas=bent, n_steps=61,
                           breakdown=False, reorthogonalized=True, norm_bound=1.0)
    lo, hi = default_fit_window(tri2)
    assert lo == 10 and hi == 25


def test_kept_basis_is_orthonormal_and_tridiagonalizes(ladder_4x2):
    lat, basis, h = ladder_4x2
    start = build_product_state(domain_wall_pattern(4, 2), basis)
    tri = lanczos_tridiagonalize(h, basis, start, 20, keep_basis=True)
    V = tri.basis_vectors
    assert V.shape == (tri.n_steps, basis.size)
    assert np.allclose(V @ V.T, np.eye(tri.n_steps), atol=1e-10)
    T = V @ assemble_dense(h, basis) @ V.T
    assert np.allclose(np.diag(T), tri.alphas, atol=1e-10)
    assert np.allclose(np.diag(T, 1), tri.betas[:tri.n_steps - 1], atol=1e-10)
    off = T - np.diag(np.diag(T)) - np.diag(np.diag(T, 1), 1) - np.diag(np.diag(T, -1), -1)
    assert np.abs(off).max() < 1e-10


def test_storage_free_mode_agrees_early(ladder_4x2):
    lat, basis, h = ladder_4x2
    start = build_product_state(domain_wall_pattern(4, 2), basis)
    full = lanczos_tridiagonalize(h, basis, start, 12)
    bare = lanczos_tridiagonalize(h, basis, start, 12, reorthogonalize=False)
    assert not bare.reorthogonalized and bare.basis_vectors is None
    assert np.allclose(bare.betas[:8], full.betas[:8], atol=1e-8)
    assert np.allclose(bare.alphas[:8], full.alphas[:8], atol=1e-8)


def test_beta_accessors(ladder_4x2):
    lat, basis, h = ladder_4x2
    start = build_product_state(domain_wall_pattern(4, 2), basis)
    tri = lanczos_tridiagonalize(h, basis, start, 10)
    j, bsq = tri.beta_sq()
    assert j[0] == 2 and j[-1] == tri.n_steps
    assert bsq == pytest.approx(tri.betas ** 2)
    with pytest.raises(IndexError):
        tri.beta(1)
    with pytest.raises(IndexError):
        tri.beta(tri.n_steps + 1)


def test_start_vector_validation(ladder_4x2):
    lat, basis, h = ladder_4x2
    bad = StateVector(basis, np.ones(basis.size))
    with pytest.raises(ValueError, match="unit norm"):
        lanczos_tridiagonalize(h, basis, bad, 5)
    good = build_product_state(domain_wall_pattern(4, 2), basis)
    with pytest.raises(ValueError, match="max_steps"):
        lanczos_tridiagonalize(h, basis, good, 0)
