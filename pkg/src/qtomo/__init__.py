"""qtomo: stroboscopic quantum tomography toolkit.

Builds evolution generators of N-level open quantum systems as explicit
superoperator matrices, computes the index of cyclicity (the minimal number
of observables for stroboscopic state reconstruction) both numerically and
from closed-form integer formulas, cross-validates the two, and simulates
the full measurement-and-reconstruction loop.
"""

from .cyclicity import (
    CyclicityReport,
    closed_form_spectrum,
    delta_k,
    detect_arithmetic,
    detect_geometric,
    eta_theorem2,
    eta_theorem3,
    formula_eta,
    index_of_cyclicity,
    ratio_spectrum,
)
from .errors import (
    ContractViolation,
    EigensolverError,
    FormulaHypothesisError,
    QtomoError,
    UnderdeterminedSystemError,
)
from .generators import (
    ArithmeticStep,
    GeneratorSpec,
    GenericStructure,
    GeometricRatio,
    SpectrumModel,
    arithmetic_model,
    build_gaussian,
    build_generator,
    build_gksl,
    build_power_model,
    build_unitary_conjugation,
    build_von_neumann,
    generator_scale,
    geometric_model,
    hermitian_from_spectrum,
    realize_hermitian,
    realize_unitary,
    unitary_from_spectrum,
)
from .linalg import (
    EigenCluster,
    Spectrum,
    devectorize,
    eig_clustered,
    geometric_multiplicity,
    hermitian_basis,
    is_hermitian,
    is_unitary,
    kron,
    min_poly_degree,
    numerical_rank,
    random_density_matrix,
    random_hermitian,
    random_unitary,
    vectorize,
)
from .tomography import (
    ExperimentPlan,
    MeasurementRecord,
    design_experiment,
    evolve,
    measure,
    observability_rank,
    reconstruct,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
