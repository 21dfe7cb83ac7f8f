"""Real-time evolution and time-resolved observables.

Two propagators with identical interfaces:

* spectral -- exact per time point through a full eigendecomposition; the
  default for small sectors (and whenever a precomputed SpectrumReport is
  supplied).
* krylov_stepper -- adaptive Lanczos-exponential stepping for sectors where
  the dense solve is unaffordable.  Each step builds a small Krylov space,
  applies exp(-i dt T) in it, and controls dt so the local error estimate
  (the last subspace component of the propagated coefficient vector) stays
  below tolerance.

Observables per time point: rung magnetization m^z(x), rung ZZ correlator,
half-cut von Neumann entropy, energy and norm (both conserved to roundoff;
drift is a consistency diagnostic, not a knob).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.linalg import eigh_tridiagonal

from .basis import build_sector_basis
from .lattice import build_lattice
from .operator import (StateVector, _check_same_sector, build_hamiltonian,
                       build_product_state, matvec)
from .spectral import SchmidtSplit, diagonalize

SPECTRAL_CAP = 4096      # auto method switches to the stepper above this


@njit(cache=True)
def _column_observables(configs, weights, ny, mz_out, czz_out):
    """Accumulate per-column <m^z> and the normalized ZZ correlator."""
    one = np.uint64(1)
    nx = mz_out.size
    half_ny = 0.5 * ny
    pair_norm = 1.0 / (ny * (ny - 1) / 2) if ny > 1 else 0.0
    for k in range(configs.size):
        w = weights[k]
        c = configs[k]
        for x in range(nx):
            pc = 0
            for y in range(ny):
                if c & (one << np.uint64(x * ny + y)):
                    pc += 1
            mz_out[x] += w * (pc - half_ny)
            if ny > 1:
                # sum over site pairs on the rung of 4 S^z S^z = +-1
                aligned = pc * (pc - 1) // 2 + (ny - pc) * (ny - pc - 1) // 2
                anti = pc * (ny - pc)
                czz_out[x] += w * (aligned - anti) * pair_norm


def _weights(amps):
    return np.ascontiguousarray(np.abs(amps) ** 2, dtype=np.float64)


def rung_magnetization(lattice, state):
    """m^z(x) = sum_y <S^z_(x,y)>; the column sums add up to the sector S^z."""
    mz = np.zeros(lattice.nx)
    czz = np.zeros(lattice.nx)
    _column_observables(state.basis.configs, _weights(state.amps), lattice.ny, mz, czz)
    return mz


def rung_zz_correlator(lattice, state):
    """C_ZZ(x) = 4 <S^z_(x,0) S^z_(x,1)> for ny = 2 (in [-1, 1], +1 on aligned
    rungs); for ny != 2 the pairwise-averaged correlator with the same
    normalization (mean of 4 S^z S^z over site pairs in the column)."""
    if lattice.ny < 2:
        raise ValueError("rung correlator needs ny >= 2")
    mz = np.zeros(lattice.nx)
    czz = np.zeros(lattice.nx)
    _column_observables(state.basis.configs, _weights(state.amps), lattice.ny, mz, czz)
    return czz


@dataclass
class EvolutionRun:
    times: np.ndarray
    mz: np.ndarray        # (nt, nx)
    czz: np.ndarray       # (nt, nx)
    svn: np.ndarray       # (nt,)
    energy: np.ndarray    # (nt,)
    norm: np.ndarray      # (nt,)
    method: str
    cut: int


def _record(h, basis, lattice, split, psi, out, i):
    w = _weights(psi)
    mz = np.zeros(lattice.nx)
    czz = np.zeros(lattice.nx)
    _column_observables(basis.configs, w, lattice.ny, mz, czz)
    out["mz"][i] = mz
    out["czz"][i] = czz
    out["svn"][i] = split.entropy(psi)
    out["norm"][i] = math.sqrt(float(w.sum()))
    hpsi = matvec(h, basis, psi)
    out["energy"][i] = float(np.real(np.vdot(psi, hpsi)))


def evolve(h, basis, psi0, t_grid, method="auto", report=None, cut=None,
           subspace=30, step_tol=1e-9, threads=None, cap=SPECTRAL_CAP):
    """Propagate |psi(t)> = exp(-iHt)|psi0> and record observables on t_grid.

    t_grid must be non-negative and increasing; evolution always starts from
    psi0 at t = 0.  method "auto" picks spectral for dim <= cap (or when a
    report with eigenvectors is passed), the Krylov stepper otherwise.
    """
    _check_same_sector(basis, psi0)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.size == 0 or np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be increasing and non-negative")
    if abs(psi0.norm() - 1.0) > 1e-10:
        raise ValueError("psi0 must be unit norm")
    lattice = h.lattice
    if cut is None:
        cut = lattice.nx // 2
    split = SchmidtSplit(basis, cut * lattice.ny)
    if report is not None and not report.basis.same_sector(basis):
        raise ValueError("report was computed in a different sector")
    if method == "auto":
        if report is not None and report.eigenvectors is not None:
            method = "spectral"
        else:
            method = "spectral" if basis.size <= cap else "krylov_stepper"
    nt = t_grid.size
    out = {"mz": np.zeros((nt, lattice.nx)), "czz": np.zeros((nt, lattice.nx)),
           "svn": np.zeros(nt), "energy": np.zeros(nt), "norm": np.zeros(nt)}

    if method == "spectral":
        if report is None or report.eigenvectors is None:
            report = diagonalize(h, basis, want_vectors=True)
        V = report.eigenvectors
        coeff = V.T @ psi0.amps
        for i, t in enumerate(t_grid):
            w = np.exp(-1j * report.eigenvalues * t) * coeff
            # two real gemvs: avoids promoting V to a complex copy each step
            psi = V @ w.real + 1j * (V @ w.imag)
            _record(h, basis, lattice, split, psi, out, i)
    elif method == "krylov_stepper":
        psi = psi0.amps.astype(np.complex128)
        t = 0.0
        dt_suggest = min(1.0, 1.0 / max(h.norm_bound(), 1e-30))
        for i, target in enumerate(t_grid):
            while t < target - 1e-12 * max(1.0, target):
                dt = min(dt_suggest, target - t)
                psi, dt_used, dt_suggest = _krylov_step(
                    h, basis, psi, dt, subspace, step_tol, threads)
                t += dt_used
            _record(h, basis, lattice, split, psi, out, i)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EvolutionRun(times=t_grid, mz=out["mz"], czz=out["czz"], svn=out["svn"],
                        energy=out["energy"], norm=out["norm"], method=method, cut=cut)


def _krylov_step(h, basis, psi, dt, subspace, tol, threads):
    """One adaptive exp(-iH dt)-step; returns (psi', dt_used, dt_next)."""
    dim = psi.size
    m = min(subspace, dim)
    V = np.empty((m, dim), dtype=np.complex128)
    alphas = np.empty(m)
    betas = np.empty(max(m - 1, 0))
    V[0] = psi / np.linalg.norm(psi)
    k = m
    exact = False
    w = np.empty(dim, dtype=np.complex128)
    for j in range(m):
        matvec(h, basis, V[j], out=w, threads=threads)
        alphas[j] = float(np.real(np.vdot(V[j], w)))
        for _ in range(2):
            w -= V[:j + 1].T @ (V[:j + 1].conj() @ w)
        if j + 1 == m:
            break
        b = float(np.linalg.norm(w))
        if b < 1e-14 * max(1.0, h.norm_bound()):
            k = j + 1
            exact = True   # Krylov space closed: propagation exact in it
            break
        betas[j] = b
        V[j + 1] = w / b
    if k >= dim:
        exact = True
    ew, es = eigh_tridiagonal(alphas[:k], betas[:k - 1])
    while True:
        u = es @ (np.exp(-1j * ew * dt) * es[0, :])
        err = abs(u[-1]) if (k == m and not exact) else 0.0
        if err <= tol or dt <= 1e-12:
            break
        dt *= 0.5
    psi_new = u @ V[:k]
    dt_next = dt * 1.5 if (err <= 0.01 * tol and not exact) else dt
    return psi_new, dt, dt_next


@dataclass
class WindowAverage:
    window: tuple
    n_points: int
    mz: np.ndarray
    czz: np.ndarray
    svn: float
    energy: float


def window_average(run, t_min, t_max):
    """Trapezoidal time average of all recorded observables over the window."""
    sel = (run.times >= t_min) & (run.times <= t_max)
    if np.sum(sel) < 2:
        raise ValueError(f"window [{t_min}, {t_max}] holds {np.sum(sel)} grid points")
    t = run.times[sel]
    span = t[-1] - t[0]

    def avg(y):
        return np.trapezoid(y, t, axis=0) / span

    return WindowAverage(window=(float(t[0]), float(t[-1])), n_points=int(np.sum(sel)),
                         mz=avg(run.mz[sel]), czz=avg(run.czz[sel]),
                         svn=float(avg(run.svn[sel])), energy=float(avg(run.energy[sel])))


# ------------------------------------------------------------- domain sweep

def rung_domain_patterns(nx, longest):
    """All S^z = 0 rung-ferromagnetic patterns whose longest up-domain has the
    given length and sits at the left edge (x = 0); equally long domains may
    occur elsewhere, longer ones may not."""
    if nx % 2:
        raise ValueError("S^z = 0 rung patterns need even nx")
    n_up = nx // 2
    if not 1 <= longest <= n_up:
        raise ValueError(f"longest domain must be in 1..{n_up}")
    head = list(range(longest))
    rest = nx - longest - 1          # position `longest` is forced down
    remaining = n_up - longest
    patterns = []
    for tail in itertools.combinations(range(longest + 1, nx), remaining):
        ups = set(head) | set(tail)
        run = best = 0
        for x in range(nx):
            run = run + 1 if x in ups else 0
            best = max(best, run)
        if best == longest:
            patterns.append("".join("u" if x in ups else "d" for x in range(nx)))
    return patterns


@dataclass
class SweepResult:
    longest: int
    patterns: list
    edge_averages: np.ndarray
    mean: float
    std: float           # population std over initial patterns
    window: tuple


def domain_sweep(nx, ny, longest, j_par=1.0, j_perp=1.0, delta_par=0.0,
                 delta_perp=0.0, shell_perturbations=(), window=(100.0, 1000.0),
                 dt=1.0, pattern_cap=512, edge_column=0, threads=None,
                 report=None, h=None, basis=None):
    """Evolve every qualifying rung pattern and average the edge magnetization.

    Heavy shared pieces (hamiltonian, basis, spectral report) may be passed in
    when sweeping several domain lengths on one lattice.
    """
    patterns = rung_domain_patterns(nx, longest)
    if len(patterns) > pattern_cap:
        raise ValueError(f"{len(patterns)} initial patterns exceed cap {pattern_cap}")
    if h is None:
        lat = build_lattice(nx, ny, j_par=j_par, j_perp=j_perp, delta_par=delta_par,
                            delta_perp=delta_perp, shell_perturbations=shell_perturbations)
        h = build_hamiltonian(lat)
    if basis is None:
        basis = build_sector_basis(nx * ny, nx * ny // 2)
    if report is None and basis.size <= SPECTRAL_CAP:
        report = diagonalize(h, basis, want_vectors=True)
    t_grid = np.arange(window[0], window[1] + 0.5 * dt, dt)
    edge = np.empty(len(patterns))
    for p, rung in enumerate(patterns):
        full = "".join(ch * ny for ch in rung)
        psi0 = build_product_state(full, basis)
        run = evolve(h, basis, psi0, t_grid, report=report, threads=threads)
        avg = window_average(run, window[0], window[1])
        edge[p] = avg.mz[edge_column]
    return SweepResult(longest=longest, patterns=patterns, edge_averages=edge,
                       mean=float(edge.mean()), std=float(edge.std()),
                       window=(float(window[0]), float(window[1])))
