"""Spectral flow of symmetric-matrix paths, crossing analysis, bifurcation
bounds, and periodic Hamiltonian linearizations."""

__version__ = "0.1.0"

from .symlin import (
    EigenDecomposition,
    EigenSolverError,
    Inertia,
    SymMatrix,
    as_sym,
    default_zero_tol,
    eigensym,
    inertia,
    kernel_basis,
    rel_morse,
)
from .sfpath import (
    AxiomReport,
    AxiomViolation,
    ComparisonReport,
    Crossing,
    EndpointCrossingError,
    OperatorPath,
    SpectralFlowResult,
    compare_paths,
    concat,
    crossing_form,
    classify_crossings,
    direct_sum,
    extended_sf,
    is_admissible,
    is_nondecreasing,
    locate_crossings,
    reverse,
    scan_path,
    sf_regular_sum,
    verify_axioms,
)
from .hamsys import (
    CoefficientBoundsReport,
    GalerkinHessian,
    HamiltonianPath,
    IndexResult,
    ResonanceError,
    StabilizationError,
    TimePeriodicCoeff,
    assemble_hessian,
    coefficient_bounds,
    delta,
    eig_range,
    galerkin_path,
    galerkin_sf,
    hamiltonian_index,
    index_difference,
    is_nonresonant,
    lk_matrix,
    symplectic_matrix,
)
from .bifurcate import (
    BifurcationReport,
    ComponentMap2D,
    PathComponentTrace,
    analyze_path,
    krasnoselskii,
    sweep2d,
    trace_components,
)
