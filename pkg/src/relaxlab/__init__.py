"""Pseudospectral laboratory for diffusive relaxation limits.

Stiff compressible Euler and Euler-Maxwell systems on the torus, their
porous-medium / drift-diffusion limits, first-order correctors, and an error
harness that measures Sobolev-norm convergence rates over an eps ladder.
"""

from .config import (
    ExperimentConfig,
    default_config,
    parse_config,
    parse_config_text,
    serialize_config,
)
from .errors import (
    AlignmentError,
    BlowupGuard,
    CFLViolation,
    ConstraintDrift,
    DimensionError,
    InsufficientPoints,
    MeanNotOne,
    MeanNotZero,
    NegativeTime,
    NotWellPrepared,
    ParseError,
    RelaxLabError,
    SamplingTooCoarse,
    VacuumError,
    ValidationError,
)
from .euler import (
    EulerState,
    EulerTrajectory,
    RelaxParams,
    default_dt,
    euler_rhs_nonstiff,
    imex_step,
    initial_energy,
    solve_euler,
)
from .families import (
    bump_density,
    corrector_init,
    cosine_density,
    em_initial,
    euler_initial,
    limit_density,
    mode_velocity,
)
from .harness import (
    ErrorRow,
    ErrorTable,
    InitialLayer,
    RateFit,
    StreamFunctionSeries,
    error_report_em,
    error_report_thm11,
    error_report_thm12,
    fit_rate,
    initial_layer_eval,
    stream_function,
)
from .limit import (
    CorrectorBundle,
    LimitBundle,
    darcy_flux,
    expand,
    solve_corrector,
    solve_porous_medium,
)
from .maxwell import (
    EMCorrectorBundle,
    EMLimitBundle,
    EMParams,
    EMState,
    EMTrajectory,
    divB_norm,
    em_energy,
    em_step,
    gauss_residual,
    make_em_initial,
    solve_drift_diffusion,
    solve_em,
    solve_em_corrector,
)
from .pressure import PressureLaw
from .runner import RunReport, assert_rates, eps_sweep, run_experiment
from .reporting import (
    csv_text,
    emit_csv,
    emit_json,
    emit_plotscript,
    render_figures,
    summary_text,
)
from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    curl,
    dealias,
    divergence,
    fractional_op,
    gradient,
    hom_sobolev_norm,
    inv_lap_gradient,
    l2_norm,
    laplacian,
    sobolev_norm,
)

__version__ = "0.1.0"
