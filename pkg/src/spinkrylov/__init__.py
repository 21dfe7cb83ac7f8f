"""Spin-1/2 XX/XXZ ladders: exact spectra, symmetry-protected zero modes,
Krylov-space dynamics, scar states, and a free-fermion contrast model."""

from .basis import SectorBasis, build_sector_basis, rank
from .dynamics import (EvolutionRun, SweepResult, WindowAverage, domain_sweep,
                       evolve, rung_domain_patterns, rung_magnetization,
                       rung_zz_correlator, window_average)
from .fermion import (CorrelationMatrix, SingleParticleSystem,
                      column_filled_initial, correlation_evolve, densities,
                      dispersion_formula, dispersion_spectrum, hopping_matrix,
                      occupied_sites_initial, site_magnetization)
from .krylov import (ChainZeroMode, TridiagonalData, chain_zero_mode,
                     default_fit_window, double_linear_fit,
                     lanczos_tridiagonalize, power_law_fit)
from .lattice import (Bond, LatticeSpec, build_lattice, inversion_map,
                      neighbor_shell, squared_distances)
from .operator import (HamiltonianSpec, StateVector, apply_hamiltonian,
                       apply_symmetry, assemble_dense, build_hamiltonian,
                       build_product_state, domain_wall_pattern, matvec,
                       resolve_threads)
from .scars import (ScarState, q_operator_apply, ra_states, rf_schmidt,
                    rf_state)
from .spectral import (ChiralKernelCertificate, EntanglementReport,
                       ProjectionResult, SchmidtSplit, SpectrumReport,
                       bipartite_entropy, chiral_block,
                       chiral_kernel_certificate, chiral_spectrum_values,
                       degenerate_groups, diagonalize, eigenstate_entropies,
                       page_value, sublattice_partition, thermal_entropy,
                       zero_mode_count, zero_mode_projection)
from .witten import brute_force_trace, tr_chiral_formula, tr_sublattice_formula

__version__ = "0.1.0"

__all__ = [
    "Bond", "ChainZeroMode", "ChiralKernelCertificate", "CorrelationMatrix",
    "EntanglementReport", "EvolutionRun", "HamiltonianSpec", "LatticeSpec",
    "ProjectionResult", "ScarState", "SchmidtSplit", "SectorBasis",
    "SingleParticleSystem", "SpectrumReport", "StateVector", "SweepResult",
    "TridiagonalData", "WindowAverage", "apply_hamiltonian", "apply_symmetry",
    "assemble_dense", "bipartite_entropy", "brute_force_trace",
    "build_hamiltonian", "build_lattice", "build_product_state",
    "build_sector_basis", "chain_zero_mode", "chiral_block",
    "chiral_kernel_certificate", "chiral_spectrum_values",
    "column_filled_initial", "correlation_evolve", "default_fit_window",
    "degenerate_groups", "densities", "diagonalize", "dispersion_formula",
    "dispersion_spectrum", "domain_sweep", "domain_wall_pattern",
    "double_linear_fit", "eigenstate_entropies", "evolve", "hopping_matrix",
    "inversion_map", "lanczos_tridiagonalize", "matvec", "neighbor_shell",
    "occupied_sites_initial", "page_value", "power_law_fit",
    "q_operator_apply", "ra_states", "rank", "resolve_threads", "rf_schmidt",
    "rf_state", "rung_domain_patterns", "rung_magnetization",
    "rung_zz_correlator", "site_magnetization", "squared_distances",
    "sublattice_partition", "thermal_entropy", "tr_chiral_formula",
    "tr_sublattice_formula", "window_average", "zero_mode_count",
    "zero_mode_projection",
]
