"""Time-Taylor series for ancient and backward heat flows on graphs."""
from .counterexample import (
    TychonovError,
    analyticity_gap,
    growth_profile,
    tychonov_eval,
    tychonov_f_derivative,
    tychonov_poly,
    tychonov_residual,
)
from .domain import (
    DomainError,
    DomainGraph,
    LaplacianOperator,
    SpaceTimeField,
    ball_volume,
    build_lattice,
    hop_distance,
    laplacian,
    load_domain,
    path_graph,
    random_connected_graph,
    read_field_csv,
    save_domain,
    spectral_radius_bound,
)
from .inequalities import (
    InequalityReport,
    MeanValueParams,
    space_time_cube,
    taylor_remainder_decay,
    verify_caccioppoli,
    verify_derivative_sup,
    verify_induction_bound,
    verify_mean_value,
)
from .ladder import (
    CoefficientLadder,
    GrowthBound,
    build_ladder,
    check_solvability,
    estimate_growth,
)
from .oracle import (
    ancient_window,
    eigendecompose,
    heat_evolve_exact,
    heat_evolve_stepped,
    time_derivative_fd,
)
from .series import (
    TruncationError,
    evaluate_series,
    reconstruct_ancient,
    roundtrip_error,
    series_solution,
    solve_backward,
)

__version__ = "0.1.0"
