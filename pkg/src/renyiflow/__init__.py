"""Numerical laboratory for nonlinear diffusion flows and entropy inequalities.

Builds steady profiles (Gaussian and Barenblatt) matched to prescribed
moments, evolves u_t = Laplacian(u^p) at desk scale, rescales trajectories by
their second moment, and verifies entropy decay bounds, isoperimetric-type
inequalities and entropy-power concavity on the results.
"""

from .bounds import (
    ConcavityReport,
    DecayCurve,
    InequalitySuiteReport,
    RateComparison,
    Theorem,
    compare_rates,
    concavity_check,
    inequality_suite,
    linear_bound,
    nonlinear_bound,
    verify_decay,
)
from .density import (
    Density,
    density_from_json,
    density_from_values,
    density_to_csv,
    density_to_json,
    dilate,
    gaussian_density,
    gaussian_mixture_density,
    lp_integral,
    load_density_json,
    moments,
    normalize,
    save_density_json,
    uniform_box_density,
)
from .entropy import (
    EntropyReport,
    entropy_powers,
    entropy_report,
    fisher_information,
    generalized_fisher_information,
    ralston_entropy,
    relative_renyi,
    renyi_entropy,
    renyi_gap,
    scale_invariant_renyi,
)
from .evolve import (
    GaussianParams,
    Provenance,
    Scheme,
    Snapshot,
    SolverAbort,
    SolverConfig,
    Trajectory,
    energy_rate_check,
    exact_barenblatt,
    exact_heat,
    save_trajectory,
    solve,
)
from .grids import Grid, GridKind, gradient, integrate, make_grid
from .profiles import (
    ProfileConstructionError,
    ProfileKind,
    SteadyProfile,
    SteadyStateReport,
    barenblatt_matched,
    closed_form_moments,
    continuum_parameters,
    critical_exponent,
    gaussian_matched,
    matched_profile,
    phi_monotonicity_check,
    selfsimilar_barenblatt,
    selfsimilar_exponent,
    steady_state_report,
)
from .rescale import (
    ScaledTrajectory,
    StationarityReport,
    save_scaled_trajectory,
    stationarity_residual,
    tau_of_t,
    to_scaled,
)

__version__ = "0.1.0"
