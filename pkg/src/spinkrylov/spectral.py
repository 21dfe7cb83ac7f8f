"""Dense sector diagonalization and spectral analytics.

Besides the plain dense eigensolver this module exploits the chiral structure
of pure-XX Hamiltonians: in the eigenbasis of the sublattice sign operator S,
H is block-off-diagonal,

    H = [[0, A], [A^T, 0]],

so the spectrum is {+sigma} u {-sigma} over the singular values of A plus
|n_plus - n_minus| exact zeros, and the zero-energy degeneracy equals
dim - 2*rank(A).  Two consequences are used heavily:

* `diagonalize(..., strategy="chiral_svd")` gets the full spectrum (and, if
  requested, eigenvectors) from one SVD of the half-size block -- faster and
  with the +-E pairing exact by construction.

* `chiral_kernel_certificate` bounds the kernel dimension without any floating
  point at all: A's nonzero entries are all the same J/2, so A scaled to a 0/1
  integer matrix has rank_GF2(A) <= rank_Q(A), giving

      dim - 2*rank_Q(A) <= dim - 2*rank_GF2(A).

  When A is full rank over GF(2) the kernel dimension is pinned exactly at
  |n_plus - n_minus|.  This certifies "no zero modes" on sectors far beyond
  the dense cap (the bit-packed elimination needs dim^2/8 bytes... per class,
  e.g. 74 MB where the dense matrix would need 19 GB).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from numba import njit
from scipy.special import logsumexp

from .operator import (StateVector, _check_same_sector, _find, assemble_dense,
                       sublattice_signs)

DENSE_CAP = 20000
ZERO_TOL_FACTOR = 1e-10     # zero modes counted at |E| <= factor * max|E|
GROUP_TOL_FACTOR = 1e-8     # degenerate-group clustering for time averages


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    zero_tol: float
    zero_count: int
    lattice: object
    basis: object
    strategy: str
    zero_gap: tuple = (0.0, np.inf)   # (largest counted |E|, smallest excluded |E|)

    @property
    def max_abs_e(self):
        return float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0


@dataclass
class EntanglementReport:
    entropies: np.ndarray   # nats, one per eigenstate
    cut: int                # left block = columns x < cut
    n_left_sites: int
    n_right_sites: int


def sublattice_partition(lattice, basis):
    """Indices of the S = +1 / S = -1 configs and each config's position
    within its class."""
    signs = sublattice_signs(lattice, basis)
    idx_plus = np.nonzero(signs > 0)[0]
    idx_minus = np.nonzero(signs < 0)[0]
    pos = np.empty(basis.size, dtype=np.int64)
    pos[idx_plus] = np.arange(idx_plus.size)
    pos[idx_minus] = np.arange(idx_minus.size)
    return signs, idx_plus, idx_minus, pos


@njit(cache=True)
def _block_fill(configs, xx_masks, xx_amps, signs, pos, out):
    """A[pos(k), pos(k')] = <k|H|k'> for k in the plus class (gather by row)."""
    zero = np.uint64(0)
    for k in range(configs.size):
        if signs[k] < 0:
            continue
        row = pos[k]
        c = configs[k]
        for t in range(xx_masks.size):
            bits = c & xx_masks[t]
            if bits != zero and bits != xx_masks[t]:
                out[row, pos[_find(configs, c ^ xx_masks[t])]] += xx_amps[t]


@njit(cache=True)
def _gf2_fill(configs, xx_masks, signs, pos, rows):
    zero = np.uint64(0)
    one = np.uint64(1)
    for k in range(configs.size):
        if signs[k] < 0:
            continue
        row = pos[k]
        c = configs[k]
        for t in range(xx_masks.size):
            bits = c & xx_masks[t]
            if bits != zero and bits != xx_masks[t]:
                j = pos[_find(configs, c ^ xx_masks[t])]
                rows[row, j >> 6] ^= one << np.uint64(j & 63)


@njit(cache=True)
def _gf2_rank(rows, ncols):
    """Rank over GF(2) by forward elimination on bit-packed rows (in place)."""
    nrows, nwords = rows.shape
    one = np.uint64(1)
    rank = 0
    for col in range(ncols):
        word = col >> 6
        bit = one << np.uint64(col & 63)
        piv = -1
        for r in range(rank, nrows):
            if rows[r, word] & bit:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for w in range(word, nwords):
                t = rows[rank, w]
                rows[rank, w] = rows[piv, w]
                rows[piv, w] = t
        for r in range(piv + 1, nrows):
            if rows[r, word] & bit:
                for w in range(word, nwords):
                    rows[r, w] ^= rows[rank, w]
        rank += 1
        if rank == nrows:
            break
    return rank


@dataclass
class ChiralKernelCertificate:
    n_plus: int
    n_minus: int
    rank_gf2: int
    kernel_upper_bound: int      # dim - 2*rank_gf2 >= true kernel dim
    kernel_exact: int | None     # set iff full GF(2) rank pins it
    method: str = "gf2"


def chiral_kernel_certificate(h, basis):
    """Exact-arithmetic bound on dim ker(H) for a chiral (pure-XX) Hamiltonian.

    Requires all active XX amplitudes equal in magnitude so the off-diagonal
    block scales to a 0/1 integer matrix.
    """
    if not h.is_chiral:
        raise ValueError("Hamiltonian is not chiral (ZZ or same-sublattice terms active)")
    active = h.xx_amps[h.xx_amps != 0.0]
    if active.size and np.unique(np.abs(active)).size != 1:
        raise ValueError("GF(2) certificate needs all active XX couplings equal in magnitude")
    signs, idx_plus, idx_minus, pos = sublattice_partition(h.lattice, basis)
    n_plus, n_minus = idx_plus.size, idx_minus.size
    nwords = (n_minus + 63) // 64
    rows = np.zeros((n_plus, nwords), dtype=np.uint64)
    _gf2_fill(basis.configs, h.xx_pair_masks, signs, pos, rows)
    r = int(_gf2_rank(rows, n_minus))
    ub = basis.size - 2 * r
    exact = abs(n_plus - n_minus) if r == min(n_plus, n_minus) else None
    return ChiralKernelCertificate(n_plus, n_minus, r, ub, exact)


def chiral_block(h, basis, dtype=np.float64):
    """The off-diagonal block A with H = [[0, A], [A^T, 0]] in the S basis."""
    if not h.is_chiral:
        raise ValueError("Hamiltonian is not chiral (ZZ or same-sublattice terms active)")
    signs, idx_plus, idx_minus, pos = sublattice_partition(h.lattice, basis)
    A = np.zeros((idx_plus.size, idx_minus.size), dtype=dtype)
    _block_fill(basis.configs, h.xx_pair_masks, h.xx_amps, signs, pos, A)
    return A, idx_plus, idx_minus


def diagonalize(h, basis, want_vectors=False, cap=DENSE_CAP, strategy="auto",
                zero_tol=None):
    """Full eigendecomposition of the sector Hamiltonian.

    strategy: "dense" (reference), "chiral_svd" (pure-XX only; spectrum from
    the half-size block SVD with the +-E pairing exact), or "auto" (dense).
    """
    if basis.size > cap:
        raise ValueError(
            f"sector size {basis.size} exceeds dense cap {cap}; use the krylov "
            "module for dynamics or chiral_kernel_certificate for zero modes")
    if strategy == "auto":
        strategy = "dense"
    if strategy == "dense":
        M = assemble_dense(h, basis, cap=cap)
        if want_vectors:
            e, V = sla.eigh(M, overwrite_a=True, driver="evr")
        else:
            e = sla.eigh(M, overwrite_a=True, driver="evr", eigvals_only=True)
            V = None
    elif strategy == "chiral_svd":
        e, V = _chiral_svd_eig(h, basis, want_vectors)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    report = SpectrumReport(eigenvalues=e, eigenvectors=V, zero_tol=0.0,
                            zero_count=0, lattice=h.lattice, basis=basis,
                            strategy=strategy)
    zero_mode_count(report, zero_tol)
    return report


def chiral_spectrum_values(h, basis, dtype=np.float64):
    """Eigenvalues of a chiral Hamiltonian from block singular values only.

    With dtype=float32 the block for a C(18,9)-size sector fits in ~2.4 GB
    where float64 would not; singular values then carry an absolute error
    ~ eps_f32 * sigma_max, which the caller must weigh against the zero
    tolerance (see chiral_kernel_certificate for the exact alternative).
    """
    A, _, _ = chiral_block(h, basis, dtype=dtype)
    n_plus, n_minus = A.shape
    s = sla.svdvals(A, overwrite_a=True).astype(np.float64)
    return np.concatenate([-s, np.zeros(abs(n_plus - n_minus)), s[::-1]])


def _chiral_svd_eig(h, basis, want_vectors):
    A, idx_plus, idx_minus = chiral_block(h, basis)
    n_plus, n_minus = A.shape
    n_pair = min(n_plus, n_minus)
    if want_vectors:
        U, s, Vt = sla.svd(A, full_matrices=True, overwrite_a=True)
    else:
        s = sla.svdvals(A, overwrite_a=True)
        U = Vt = None
    e = np.concatenate([-s, np.zeros(abs(n_plus - n_minus)), s[::-1]])
    order = np.argsort(e, kind="stable")
    e = e[order]
    if not want_vectors:
        return e, None
    dim = basis.size
    V = np.zeros((dim, dim), dtype=np.float64)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    # columns in pre-sort order: [-sigma_i (i=0..n_pair), extra zeros, +sigma reversed]
    for i in range(n_pair):
        V[idx_plus, i] = U[:, i] * inv_sqrt2
        V[idx_minus, i] = -Vt[i, :] * inv_sqrt2
        jcol = 2 * n_pair + abs(n_plus - n_minus) - 1 - i
        V[idx_plus, jcol] = U[:, i] * inv_sqrt2
        V[idx_minus, jcol] = Vt[i, :] * inv_sqrt2
    # null-space columns of the larger class sit at exact zero
    for t in range(abs(n_plus - n_minus)):
        col = n_pair + t
        if n_plus > n_minus:
            V[idx_plus, col] = U[:, n_minus + t]
        else:
            V[idx_minus, col] = Vt[n_plus + t, :]
    return e, V[:, order]


def zero_mode_count(report, zero_tol=None):
    """Count |E| <= zero_tol (default 1e-10 * max|E|), with a gap certificate."""
    if zero_tol is None:
        zero_tol = ZERO_TOL_FACTOR * report.max_abs_e
    abse = np.abs(report.eigenvalues)
    counted = abse <= zero_tol
    count = int(np.sum(counted))
    largest_counted = float(abse[counted].max()) if count else 0.0
    excluded = abse[~counted]
    smallest_excluded = float(excluded.min()) if excluded.size else np.inf
    report.zero_tol = float(zero_tol)
    report.zero_count = count
    report.zero_gap = (largest_counted, smallest_excluded)
    if count and largest_counted > 0 and smallest_excluded / largest_counted < 1e3:
        warnings.warn(
            f"ambiguous zero space: largest counted |E| = {largest_counted:.3e}, "
            f"smallest excluded = {smallest_excluded:.3e}", stacklevel=2)
    return count


# ---------------------------------------------------------- entanglement

class SchmidtSplit:
    """Reshape map from sector amplitudes to per-block (left, right) matrices.

    The cut keeps the first n_left_sites bit positions (= columns x < cut for
    the i = x*ny + y ordering).  Amplitudes split into independent blocks by
    the number k of up spins on the left; block k is the full
    C(n_left, k) x C(n_right, n_up - k) grid, indexed by the colex rank of
    each half-mask within its own popcount class.
    """

    def __init__(self, basis, n_left_sites):
        from .basis import _rank_kernel, _COMB
        if not 0 < n_left_sites < basis.n_sites:
            raise ValueError(f"cut must be interior, got {n_left_sites} of {basis.n_sites}")
        self.basis = basis
        self.n_left = n_left_sites
        self.n_right = basis.n_sites - n_left_sites
        left = basis.configs & np.uint64((1 << n_left_sites) - 1)
        right = basis.configs >> np.uint64(n_left_sites)
        kup = np.empty(basis.size, dtype=np.int64)
        row = np.empty(basis.size, dtype=np.int64)
        col = np.empty(basis.size, dtype=np.int64)
        _split_ranks(left, right, _COMB, kup, row, col)
        self.blocks = []
        for k in range(max(0, basis.n_up - self.n_right), min(self.n_left, basis.n_up) + 1):
            sel = np.nonzero(kup == k)[0]
            shape = (math.comb(self.n_left, k), math.comb(self.n_right, basis.n_up - k))
            self.blocks.append((sel, row[sel], col[sel], shape))

    def schmidt_squares(self, amps):
        """All squared Schmidt coefficients (sums to ||amps||^2)."""
        out = []
        for sel, r, c, shape in self.blocks:
            B = np.zeros(shape, dtype=amps.dtype)
            B[r, c] = amps[sel]
            out.append(sla.svdvals(B) ** 2)
        return np.concatenate(out)

    def entropy(self, amps):
        """von Neumann entropy of the left reduced state, in nats."""
        s2 = self.schmidt_squares(amps)
        p = s2 / s2.sum()
        p = p[p > 1e-300]
        return float(-np.sum(p * np.log(p)))


@njit(cache=True)
def _split_ranks(left, right, comb, kup, row, col):
    one = np.uint64(1)
    for i in range(left.size):
        m = left[i]
        t = 0
        r = np.int64(0)
        p = 0
        while m != np.uint64(0):
            if m & one:
                t += 1
                r += comb[p, t]
            m >>= one
            p += 1
        kup[i] = t
        row[i] = r
        m = right[i]
        t = 0
        r = np.int64(0)
        p = 0
        while m != np.uint64(0):
            if m & one:
                t += 1
                r += comb[p, t]
            m >>= one
            p += 1
        col[i] = r


def bipartite_entropy(basis, amps, n_left_sites, split=None):
    split = split or SchmidtSplit(basis, n_left_sites)
    return split.entropy(amps)


def eigenstate_entropies(report, basis, cut=None):
    """S_vN of every eigenvector across the column cut (default nx/2)."""
    if report.eigenvectors is None:
        raise ValueError("diagonalize with want_vectors=True first")
    ny = report.lattice.ny
    if cut is None:
        cut = report.lattice.nx // 2
    n_left = cut * ny
    split = SchmidtSplit(basis, n_left)
    ent = np.empty(report.eigenvalues.size)
    for n in range(ent.size):
        ent[n] = split.entropy(report.eigenvectors[:, n])
    return EntanglementReport(entropies=ent, cut=cut, n_left_sites=n_left,
                              n_right_sites=basis.n_sites - n_left)


# ---------------------------------------------------------- thermal curve

def page_value(n_sites):
    """Expected half-cut entropy of a random pure state, (N ln2 - 1)/2 nats."""
    return 0.5 * (n_sites * math.log(2.0) - 1.0)


def _mean_energy(e, beta):
    logw = -beta * e
    logw -= logsumexp(logw)
    return float(np.dot(np.exp(logw), e))


def thermal_entropy(report, E, bisect_steps=200):
    """Solve <H>_beta = E over the sector spectrum; return (beta, S_th).

    S_th(beta) = beta*<H>_beta + ln Z.  The map beta -> <H>_beta is strictly
    decreasing, so plain bisection on an expanding bracket is enough.
    """
    e = report.eigenvalues
    e_min, e_max = float(e[0]), float(e[-1])
    if e_max - e_min < 1e-300:
        raise ValueError("spectrum is a single point; temperature undefined")
    if not e_min < E < e_max:
        raise ValueError(f"E = {E} outside attainable range ({e_min}, {e_max})")
    scale = 1.0 / max(abs(e_min), abs(e_max))
    lo, hi = -scale, scale           # <H> decreasing: f(lo) >= f(hi)
    while _mean_energy(e, lo) < E:
        lo *= 2.0
        if abs(lo) > 1e8 * scale:
            raise ValueError(f"E = {E} too close to the spectral edge")
    while _mean_energy(e, hi) > E:
        hi *= 2.0
        if abs(hi) > 1e8 * scale:
            raise ValueError(f"E = {E} too close to the spectral edge")
    for _ in range(bisect_steps):
        mid = 0.5 * (lo + hi)
        if _mean_energy(e, mid) > E:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    s_th = beta * _mean_energy(e, beta) + float(logsumexp(-beta * e))
    return beta, s_th


# ---------------------------------------------------------- time averages

@njit(cache=True)
def _site_sz_accumulate(configs, weights, out):
    one = np.uint64(1)
    for k in range(configs.size):
        w = weights[k]
        c = configs[k]
        for i in range(out.size):
            if c & (one << np.uint64(i)):
                out[i] += 0.5 * w
            else:
                out[i] -= 0.5 * w
    return out


def site_sz_expectation(basis, weights):
    """<S^z_i> per site from per-config probability weights."""
    out = np.zeros(basis.n_sites)
    _site_sz_accumulate(basis.configs, np.ascontiguousarray(weights, dtype=np.float64), out)
    return out


def degenerate_groups(eigenvalues, group_tol):
    """Slices of exactly-degenerate eigenvalue clusters (gap <= group_tol)."""
    splits = np.nonzero(np.diff(eigenvalues) > group_tol)[0] + 1
    bounds = np.concatenate([[0], splits, [eigenvalues.size]])
    return [slice(bounds[i], bounds[i + 1]) for i in range(bounds.size - 1)]


@dataclass
class ProjectionResult:
    c_p_sq: float
    projected_state: StateVector
    site_avg: np.ndarray          # full zero + degenerate-group time average
    zero_term: np.ndarray         # kernel contribution alone
    second_term: np.ndarray       # degenerate nonzero-E contribution
    second_term_abs_max: float
    zero_tol: float
    group_tol: float


def zero_mode_projection(report, psi0, group_tol=None):
    """Infinite-time average of <S^z_i> from the spectral decomposition.

    Exactly-degenerate eigenvalue groups (tolerance 1e-8 * max|E| by default)
    retain their internal coherences; all cross-group phases average out.  The
    kernel (zero-mode) group is reported separately together with
    c_P^2 = ||P_0 psi0||^2.
    """
    if report.eigenvectors is None:
        raise ValueError("diagonalize with want_vectors=True first")
    _check_same_sector(report.basis, psi0)
    V = report.eigenvectors
    e = report.eigenvalues
    if group_tol is None:
        group_tol = GROUP_TOL_FACTOR * report.max_abs_e
    coeff = V.T @ psi0.amps
    zero_sel = np.abs(e) <= report.zero_tol
    weights = np.zeros(e.size, dtype=np.float64)
    zero_weights = np.zeros(e.size, dtype=np.float64)

    singles_mask = np.ones(e.size, dtype=bool)
    for g in degenerate_groups(e, group_tol):
        if g.stop - g.start > 1:
            singles_mask[g] = False
            psi_g = V[:, g] @ coeff[g]
            wg = np.abs(psi_g) ** 2
            weights += wg
            if zero_sel[g].all():
                zero_weights += wg
    # singleton groups contribute |c_n|^2 |v_n|^2; chunked to bound memory
    singles = np.nonzero(singles_mask)[0]
    cs = np.abs(coeff[singles]) ** 2
    for start in range(0, singles.size, 512):
        blk = singles[start:start + 512]
        weights += (V[:, blk] ** 2) @ cs[start:start + 512]

    proj = V[:, zero_sel] @ coeff[zero_sel]
    c_p_sq = float(np.sum(np.abs(coeff[zero_sel]) ** 2))
    if not zero_weights.any() and zero_sel.any():
        # kernel group was all singletons (count <= 1 per group)
        for n in np.nonzero(zero_sel)[0]:
            zero_weights += np.abs(coeff[n]) ** 2 * V[:, n] ** 2

    site_avg = site_sz_expectation(report.basis, weights)
    zero_term = site_sz_expectation(report.basis, zero_weights)
    second = site_avg - zero_term
    return ProjectionResult(
        c_p_sq=c_p_sq,
        projected_state=StateVector(report.basis, proj),
        site_avg=site_avg, zero_term=zero_term, second_term=second,
        second_term_abs_max=float(np.max(np.abs(second))) if second.size else 0.0,
        zero_tol=report.zero_tol, group_tol=float(group_tol))
