"""Exact mid-spectrum eigenstates of the two-leg XX ladder.

The states come in two families, both built from perfectly correlated rungs:

* RF(n) -- n fully polarized up-rungs on an all-down background, summed over
  the C(nx, n) placements with alternating signs.  Every XX bond term kills
  them (leg contributions cancel pairwise between neighbouring placements),
  so they sit at E = 0 for any J_perp, J_par, and they survive rung ZZ
  coupling with eigenvalue +nx*delta_perp*j_perp/4.
* RA_even / RA_odd -- superpositions of rung-antiferromagnetic patterns over
  subsets of flipped rungs with even / odd cardinality, eigenstates at
  -nx*delta_perp*j_perp/4.

All states are constructed by direct enumeration of rung patterns, so the
amplitudes are exact rationals over a square root; no operator powers and no
factorial round-off are involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .basis import build_sector_basis, rank
from .operator import StateVector


@dataclass
class ScarState:
    kind: str
    nx: int
    sector: int          # n_down of the hosting sector
    state: StateVector


def _rung_mask(xs):
    m = 0
    for x in xs:
        m |= 0b11 << (2 * x)
    return m


def rf_state(nx, n):
    """Rung-ferromagnetic scar RF(n) on the nx x 2 ladder.

    Amplitude (-1)^(sum of up-rung positions) / sqrt(C(nx, n)) on each
    configuration with n up-rungs, all other rungs down.  Lives in the sector
    n_down = 2*nx - 2*n (S^z = -nx + 2n).
    """
    if not 0 <= n <= nx:
        raise ValueError(f"n must be in 0..{nx}")
    n_down = 2 * nx - 2 * n
    basis = build_sector_basis(2 * nx, n_down)
    amps = np.zeros(basis.size)
    a = 1.0 / math.sqrt(math.comb(nx, n))
    for xs in combinations(range(nx), n):
        sign = -1 if sum(xs) % 2 else 1
        amps[rank(basis, _rung_mask(xs))] = sign * a
    return ScarState(kind=f"RF({n})", nx=nx, sector=n_down,
                     state=StateVector(basis, amps))


def ra_states(nx):
    """The rung-antiferromagnetic pair (even, odd) on the nx x 2 ladder.

    Starting from the pattern with every rung (down at y=0, up at y=1),
    flipping the rungs of a subset S contributes sign (-1)^(sum S); grouping
    by |S| parity gives two orthogonal S^z = 0 eigenstates, each containing
    2^(nx-1) patterns.
    """
    basis = build_sector_basis(2 * nx, nx)
    base = _rung_mask(()) | sum(1 << (2 * x + 1) for x in range(nx))
    a = 1.0 / math.sqrt(2 ** (nx - 1))
    amps = [np.zeros(basis.size), np.zeros(basis.size)]
    for size in range(nx + 1):
        for xs in combinations(range(nx), size):
            sign = -1 if sum(xs) % 2 else 1
            amps[size % 2][rank(basis, base ^ _rung_mask(xs))] = sign * a
    even = ScarState("RA_even", nx, nx, StateVector(basis, amps[0]))
    odd = ScarState("RA_odd", nx, nx, StateVector(basis, amps[1]))
    return even, odd


def rf_schmidt(nx, n):
    """Analytic left/right Schmidt spectrum of RF(n) at the half cut.

    lambda_l = C(nx/2, l) * C(nx/2, n-l) / C(nx, n) for l up-rungs in the
    left half (one Schmidt vector per l).  Returns (lambdas, S_vN, asymptote)
    where the asymptote is the normal approximation of the binomial weights
    at n = nx/2: S_vN -> (1/2)ln(2 pi e sigma^2) with
    sigma^2 = nx^2 / (16 (nx - 1)).
    """
    if nx % 2:
        raise ValueError("half cut needs even nx")
    if not 0 <= n <= nx:
        raise ValueError(f"n must be in 0..{nx}")
    half = nx // 2
    denom = math.comb(nx, n)
    lambdas = np.array([math.comb(half, l) * math.comb(half, n - l) / denom
                        for l in range(n + 1)])
    pos = lambdas[lambdas > 0]
    svn = float(-np.sum(pos * np.log(pos)))
    asymptote = (0.5 * math.log(math.pi * nx) - 1.5 * math.log(2)
                 + 0.5 * (1.0 + math.log(nx / (nx - 1))))
    return lambdas, svn, asymptote


def q_operator_apply(nx, n, state):
    """Apply Q_n = [sum_x (-1)^x S^+_(x,0) S^+_(x,1)]^n |all-down><all-down|.

    Projects onto the all-down component and raises n signed up-rungs out of
    it, landing in the sector n_down = 2*nx - 2*n.  States with no all-down
    support are annihilated.  Q_n |all-down> = n! * sqrt(C(nx, n)) * RF(n).
    """
    if state.basis.n_sites != 2 * nx:
        raise ValueError("state is not on the nx x 2 ladder")
    if not 0 <= n <= nx:
        raise ValueError(f"n must be in 0..{nx}")
    target = build_sector_basis(2 * nx, 2 * nx - 2 * n)
    amps = np.zeros(target.size, dtype=state.amps.dtype)
    if state.basis.n_down == 2 * nx:           # the only sector holding |all-down>
        c = state.amps[0] * math.factorial(n)
        for xs in combinations(range(nx), n):
            sign = -1 if sum(xs) % 2 else 1
            amps[rank(target, _rung_mask(xs))] = sign * c
    return StateVector(target, amps)
