"""Simulation engine for a Bose-Einstein condensate in a symmetric
circular triple-well trap: exact three-mode diagonalization, su(3)
coherent-state tools, generalized purity scaling, and the semiclassical
mean-field limit."""

__version__ = "0.1.0"

from .algebra import (ModelConsistencyError, ModelParams, generators,
                      hamiltonian_direct, hamiltonian_generators,
                      model_context, verify_equivalence)
from .coherent import CoherentPoint, QuantumState, coherent_state
from .fock import FockBasis, SparseHermitianOperator, build_basis
from .purity import (critical_chi_q, generalized_purity, ground_state_purity,
                     power_law_fit, purity_scan)
from .semiclassical import (ClassicalPoint, bifurcation_scan,
                            classical_hamiltonian, find_fixed_points,
                            integrate_trajectory, level_crossing,
                            theta_min_analysis, twin_critical_points,
                            twin_energy_reduced)
from .spectral import SpectrumResult, ground_state, spectrum
from .distributions import (ScalarField2D, count_local_maxima,
                            husimi_population, phase_distribution,
                            phase_marginal_variance)

__all__ = [
    "ModelConsistencyError", "ModelParams", "generators",
    "hamiltonian_direct", "hamiltonian_generators", "model_context",
    "verify_equivalence", "CoherentPoint", "QuantumState", "coherent_state",
    "FockBasis", "SparseHermitianOperator", "build_basis",
    "critical_chi_q", "generalized_purity", "ground_state_purity",
    "power_law_fit", "purity_scan", "ClassicalPoint", "bifurcation_scan",
    "classical_hamiltonian", "find_fixed_points", "integrate_trajectory",
    "level_crossing", "theta_min_analysis", "twin_critical_points",
    "twin_energy_reduced", "SpectrumResult", "ground_state", "spectrum",
    "ScalarField2D", "count_local_maxima", "husimi_population",
    "phase_distribution", "phase_marginal_variance",
]
