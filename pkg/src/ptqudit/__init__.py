"""Simulation of PT-symmetric qudits across an exceptional point of order d."""

from .dynamics import (
    EvolvedDensity,
    PureState,
    TimeSeries,
    evolve_density,
    evolve_state,
    lossy_propagator,
    mode_occupations,
    propagator,
    sample_trajectory,
)
from .errors import DimensionError, DomainError, InvalidValueError, NumericalFailure, PTQuditError
from .information import (
    BlochPoint,
    Factor,
    bloch_vector,
    entropy,
    expansion_occupations,
    partial_trace,
    steady_state_fit,
    subsystem_entropies,
)
from .linalg import EigenDecomposition, eig, mat_exp, singular_values
from .model import (
    Phase,
    PTHamiltonian,
    SpinRepresentation,
    build_hamiltonian,
    build_spin,
    classify_phase,
    parity_operator,
    passive_hamiltonian,
    pt_symmetry_check,
    spectrum_closed_form,
    two_qubit_identity_check,
)
from .spectral import (
    PowerLawFit,
    fit_power_law,
    growth_exponent_fit,
    growth_rate_fit,
    nilpotency_index,
    perturbed_hamiltonian,
    puiseux_fit,
)

__version__ = "0.1.0"
