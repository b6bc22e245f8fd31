"""Stability and exponential dichotomy of linear systems via evolution semigroups."""

from .dichotomy import (
    DichotomyReport,
    ProjectionFamily,
    check_projection_conditions,
    extract_pointwise_projections,
    monodromy,
    moore_penrose_left_inverse,
    projections_for_family,
    riesz_projection,
    verify_dichotomy,
)
from .propagator import EvolutionFamily, SystemSpec, build_family, evolve, expm, load_spec
from .semigroup import (
    BlockShiftOperator,
    GridFunction,
    approximate_eigenfunction,
    assemble_line,
    assemble_periodic,
    change_of_variables_check,
    semigroup_spectrum,
)
from .spectrum import (
    SpectrumReport,
    eigenvalues,
    greiner_inequality_check,
    hyperbolicity_verdict,
    resolvent_norm_on_axis,
    spectral_mapping_check,
)
from .theorems import (
    EquivalenceTable,
    check_line_semigroup,
    check_nonautonomous_semigroup,
    check_periodic_semigroup,
    check_spectral_hyperbolicity,
    run_gallery,
)

__version__ = "0.1.0"
