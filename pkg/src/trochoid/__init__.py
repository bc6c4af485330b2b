"""Random matrices and digraphs with cyclic correlations.

Generators for dense and sparse cyclic ensembles, the hypotrochoid /
polytrochoid laws predicting their spectral boundaries and interior
densities, and tools that verify the predictions on computed spectra.
"""

from .boundaries import (
    BoundaryCurve,
    HypotrochoidParams,
    MixedCycleParams,
    PolytrochoidParams,
    SparseCyclicParams,
    dense_hypotrochoid,
    dense_polytrochoid,
    has_cusps,
    mixed_cycle_asymptotic,
    mixed_cycle_boundary,
    mixed_cycle_solve,
    solve_segment_depth,
    sparse_hypotrochoid,
)
from .correlations import DenseCyclicSpec, generate_dense_cyclic, induce_cyclic_correlations
from .digraphs import (
    CycleSpecies,
    MixedCyclicSpec,
    PoissonCyclicSpec,
    RegularCyclicSpec,
    generate_mixed_cyclic,
    generate_poisson_cyclic,
    generate_regular_cyclic,
)
from .ensembles import (
    DenseMatrix,
    SparseDigraph,
    adjacency_matrix,
    combine_correlated,
    generate_base_iid,
)
from .errors import (
    CalibrationError,
    ConfigError,
    ContinuationError,
    EigensolverError,
    GenerationError,
    InvalidSpecError,
    OutsideSupportError,
    TrochoidError,
)
from .interior import DensityField, GreensFixedPoint, GridSpec, interior_density, interior_fixed_point
from .moments import (
    MomentOrder,
    MomentReport,
    brute_force_tree_walks,
    empirical_mixed_moment,
    empirical_pure_moment,
    fuss_catalan_prediction,
    mixed_moment_candidates,
    tree_walk_prediction,
)
from .pipeline import calibrate_flip_prob, run_generate, run_moments, run_verify
from .spectra import (
    ContainmentReport,
    Spectrum,
    compute_eigenvalues,
    conjugation_pairing_residual,
    containment,
    detect_deterministic_outliers,
    digraph_spectrum,
    phase_certificate,
    rotation_symmetry_residual,
)

__version__ = "0.1.0"
