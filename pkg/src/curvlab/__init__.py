"""curvlab: a numerical laboratory for axially symmetric
weighted-volume-preserving curvature flows between parallel hyperplanes.

The package simulates the flows, constructs the bifurcating family of
non-cylindrical stationary profiles, and evaluates the closed-form
stability criteria, cross-validating the analytic formulas against
independent numerical routes.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    AmbiguityError,
    ConfigError,
    ConvergenceError,
    CurvlabError,
    DegeneracyError,
    DomainError,
    InsufficientDataError,
    IntegrationError,
    RangeError,
)
from .flow import (
    FlowConfig,
    InitialCondition,
    Trajectory,
    conservation_drift,
    decay_rate_fit,
    equivalence_check,
    integrate,
    log_linear_fit,
)
from .geometry import (
    CurvaturePair,
    RadialProfile,
    WeightModel,
    binom,
    elementary_symmetric,
    mixed_volume,
    principal_curvatures,
    principal_curvatures_arrays,
    project_meanzero,
    q_density,
    unit_ball_volume,
    weight_eval,
    weighted_volume,
)
from .grid import GridCalculus
from .quadrature import QuadResult, tanh_sinh, tanh_sinh_plain
from .reduction import (
    ReducedState,
    full_rhs,
    psi_solve,
    qtilde,
    qtilde_inv,
    qtilde_prime,
    reduced_rhs,
)
from .speeds import (
    CallableSpeed,
    ElementarySpeed,
    EtaProfile,
    MeanCurvaturePowerSpeed,
    MeanCurvatureSpeed,
    RemarkPolynomialSpeed,
    SpeedModel,
    TabulatedSpeed,
    remark_example,
    speed_from_name,
)
from .stability import (
    BifShapeCoefficients,
    StabilityReport,
    bif_condition,
    build_report,
    eta_dd_analytic,
    eta_dd_sign,
    gamma_root,
    gamma_root_radical,
    homog_condition,
    jacobian_fd,
    lambda_dd_bracket,
    lambda_dd_sign,
    linear_eigenvalue,
    mixed_volume_condition,
    r_crit_find,
    stability_table,
)
from .unduloid import (
    BifurcationSample,
    UnduloidParams,
    UnduloidShape,
    critical_radius_cmc,
    default_s_grid,
    eta_curve,
    flatness_fit,
    g_s,
    mean_curvature,
    multi_period_profile,
    profile,
    rho0,
    turning_points,
)
