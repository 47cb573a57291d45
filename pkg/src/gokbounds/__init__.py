"""Ensemble variational error bounds.

Error functionals for weighted-ensemble energy minimization, the analytic
prefactors tying every error channel to the ensemble-energy error inside
its validity regime, optimal weight generators, permutohedron slice
oracles, random-conjugation sampling, and a small optimization demo.
"""

from .core import (
    MATRIX_TOL,
    WEIGHT_TOL,
    BasisMap,
    EnergySpectrum,
    ErrorBundle,
    UnistochasticMatrix,
    WeightShape,
    WeightVector,
    ensemble_energy,
    error_bundle,
    error_bundle_batch,
    observable_error_bound,
    rr_state_bounds,
    unistochastic_from_basis,
)
from .bounds import (
    BoundSet,
    ComplianceReport,
    GapFunctions,
    bound_set,
    check_bounds,
    eigenenergy_prefactors,
    eigenenergy_sum_prefactors,
    eigenstate_prefactor,
    eigenstate_sum_prefactors,
    ensemble_state_prefactors,
    gap_functions,
)
from .errors import (
    ConvergenceError,
    DegenerateSpectrumError,
    DegenerateWeightError,
    DimensionMismatchError,
    GokBoundsError,
    NonUnitaryError,
    OutOfRegimeError,
    ParameterCountError,
    RangeError,
    RegimeError,
    ShapeError,
    ValidationError,
)
from .polytope import (
    CycleReport,
    Permutation,
    PermutohedronSlice,
    SliceVertex,
    VertexClassification,
    brute_force_extrema,
    constrained_extrema,
    constraint_slice,
    cycle_bound_check,
    gok_minimum_check,
    permutohedron_vertices,
    reference_and_positive_vertices,
)
from .sampler import (
    ScatterRecord,
    ScatterResult,
    check_error_table,
    jacobi_rotation,
    jacobi_saturating_state,
    sample_orthogonal,
    sample_unitary,
    scatter_experiment,
)
from .vqe import (
    REFERENCE_MODEL,
    AdamHyper,
    IsingModel,
    OptimizerTrace,
    TracePoint,
    adam_optimize,
    ansatz_unitary,
    build_hamiltonian,
    cost_gradient,
    demo_weights,
    ensemble_cost,
    exact_spectrum,
    finite_difference_gradient,
    run_demo,
)
from .weights import (
    grid_search_optimal,
    optimal_weights_all_energies,
    optimal_weights_all_states,
    optimal_weights_lowest_K_energies,
    optimal_weights_lowest_K_states,
    optimal_weights_single_energy,
    optimal_weights_single_state,
)

__all__ = [
    "MATRIX_TOL",
    "WEIGHT_TOL",
    "BasisMap",
    "EnergySpectrum",
    "ErrorBundle",
    "UnistochasticMatrix",
    "WeightShape",
    "WeightVector",
    "ensemble_energy",
    "error_bundle",
    "error_bundle_batch",
    "observable_error_bound",
    "rr_state_bounds",
    "unistochastic_from_basis",
    "BoundSet",
    "ComplianceReport",
    "GapFunctions",
    "bound_set",
    "check_bounds",
    "eigenenergy_prefactors",
    "eigenenergy_sum_prefactors",
    "eigenstate_prefactor",
    "eigenstate_sum_prefactors",
    "ensemble_state_prefactors",
    "gap_functions",
    "ConvergenceError",
    "DegenerateSpectrumError",
    "DegenerateWeightError",
    "DimensionMismatchError",
    "GokBoundsError",
    "NonUnitaryError",
    "OutOfRegimeError",
    "ParameterCountError",
    "RangeError",
    "RegimeError",
    "ShapeError",
    "ValidationError",
    "CycleReport",
    "Permutation",
    "PermutohedronSlice",
    "SliceVertex",
    "VertexClassification",
    "brute_force_extrema",
    "constrained_extrema",
    "constraint_slice",
    "cycle_bound_check",
    "gok_minimum_check",
    "permutohedron_vertices",
    "reference_and_positive_vertices",
    "ScatterRecord",
    "ScatterResult",
    "check_error_table",
    "jacobi_rotation",
    "jacobi_saturating_state",
    "sample_orthogonal",
    "sample_unitary",
    "scatter_experiment",
    "REFERENCE_MODEL",
    "AdamHyper",
    "IsingModel",
    "OptimizerTrace",
    "TracePoint",
    "adam_optimize",
    "ansatz_unitary",
    "build_hamiltonian",
    "cost_gradient",
    "demo_weights",
    "ensemble_cost",
    "exact_spectrum",
    "finite_difference_gradient",
    "run_demo",
    "grid_search_optimal",
    "optimal_weights_all_energies",
    "optimal_weights_all_states",
    "optimal_weights_lowest_K_energies",
    "optimal_weights_lowest_K_states",
    "optimal_weights_single_energy",
    "optimal_weights_single_state",
]
