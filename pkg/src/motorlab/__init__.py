"""motorlab: steady states of multi-species drift-diffusion systems with
state switching, their small-noise phase functions, and the Hamilton-Jacobi
limit profiles they converge to."""

from motorlab.errors import (
    InputError,
    MotorLabError,
    NonConvergenceError,
    SolverError,
)
from motorlab.model import (
    AssumptionReport,
    ConstantRate,
    CosineSlopePotential,
    LinearPotential,
    ModelConfig,
    Normalization,
    PotentialSet,
    Regime,
    RegionDecomposition,
    SampledPotential,
    ShiftedCopyPotential,
    SmoothBumpRate,
    SmoothedSawtoothPotential,
    TransitionRates,
    check_assumptions,
    decompose_regions,
    eval_potential,
    negative_slope_intervals,
    validate_rates,
)
from motorlab.discretize import (
    Grid,
    SparseOperator,
    adjoint_consistency,
    assemble_operator,
    build_grid,
    sweep_grid_cells,
)
from motorlab.steady_solver import (
    DensityField,
    SweepEntry,
    SweepResult,
    continuation_sweep,
    gradient_bound,
    ladder_sigmas,
    solve_null_vector,
    solve_phase_newton,
    time_march,
)
from motorlab.phase import (
    FluxBoundReport,
    GapReport,
    PhaseField,
    check_flux_bounds,
    pairwise_gap,
    phase_consistency,
    phase_residual,
    to_phase,
)
from motorlab.hj_limit import (
    BoundCertificate,
    BranchLabel,
    HamiltonianParams,
    HJResidualReport,
    LimitProfile,
    SignConstraint,
    VanishingBounds,
    effective_hamiltonian,
    hj_residual,
    limit_bounded,
    limit_piecewise,
    limit_strong,
    limit_vanishing_bounds,
    solve_ham_roots,
)
from motorlab.analysis import (
    ConcentrationReport,
    ConditionReport,
    ConvergenceRow,
    ConvergenceTable,
    check_corollary_conditions,
    concentration_from_phase,
    concentration_masses,
    convergence_study,
    motor_effect_report,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
