"""Finite-difference toolkit for a stochastic wave equation on [0,1]:
staggered-mesh calculus, summation-by-parts identities, Carleman-type
exponential weights, an explicit leapfrog Monte Carlo solver, and
estimators assembling weighted-energy and stability inequalities.
"""

from ._kernels import backend_name
from .errors import (
    BlowUpError,
    CouplingError,
    DegenerateOrderError,
    IncompleteTrajectoryError,
    MeshMismatchError,
    SingularUpdateError,
    StencilRangeError,
    WeightOverflowError,
)
from .estimators import (
    CarlemanReport,
    MCStatistic,
    StabilityReport,
    carleman_terms,
    martingale_check,
    stability_terms,
)
from .fields import (
    constant_coefficient,
    preset_coefficient,
    random_field,
    random_slice,
    sine_field,
    sine_slice,
    zero_field,
)
from .grids import (
    Axis,
    Grid,
    GridFunction,
    build_grid,
    integrate,
    intersect,
    norm,
    normalize_region,
    trace,
)
from .identities import IDENTITY_IDS, ResidualTable, identity_residuals
from .operators import (
    apply,
    avg_t,
    avg_x,
    diff_t,
    diff_x,
    diff_xx,
    incr_t,
    s_minus,
    s_plus,
    t_minus,
    t_plus,
)
from .solver import (
    BrownianPath,
    Ensemble,
    Observation,
    ProblemData,
    SchemeCoefficients,
    Trajectory,
    observe,
    path_seed,
    run_ensemble,
    sample_brownian,
    scheme_residual,
    solve,
)
from .weights import (
    EXPRESSION_IDS,
    AdmissibilityReport,
    OrderEstimate,
    WeightParams,
    WeightValues,
    check_admissible,
    estimate_order,
    eval_weights,
    r_squared,
)

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "AdmissibilityReport",
    "BlowUpError",
    "BrownianPath",
    "CarlemanReport",
    "CouplingError",
    "DegenerateOrderError",
    "Ensemble",
    "EXPRESSION_IDS",
    "Grid",
    "GridFunction",
    "IDENTITY_IDS",
    "IncompleteTrajectoryError",
    "MCStatistic",
    "MeshMismatchError",
    "Observation",
    "OrderEstimate",
    "ProblemData",
    "ResidualTable",
    "SchemeCoefficients",
    "SingularUpdateError",
    "StabilityReport",
    "StencilRangeError",
    "Trajectory",
    "WeightOverflowError",
    "WeightParams",
    "WeightValues",
    "apply",
    "avg_t",
    "avg_x",
    "backend_name",
    "build_grid",
    "carleman_terms",
    "check_admissible",
    "constant_coefficient",
    "diff_t",
    "diff_x",
    "diff_xx",
    "estimate_order",
    "eval_weights",
    "identity_residuals",
    "incr_t",
    "integrate",
    "intersect",
    "martingale_check",
    "norm",
    "normalize_region",
    "observe",
    "path_seed",
    "preset_coefficient",
    "r_squared",
    "random_field",
    "random_slice",
    "run_ensemble",
    "sample_brownian",
    "scheme_residual",
    "sine_field",
    "sine_slice",
    "solve",
    "stability_terms",
    "trace",
    "zero_field",
]
