"""Reactive Cahn-Hilliard simulator with sharp-interface cross-validation."""

from .errors import (
    ConfigurationError,
    MeasurementError,
    NumericalError,
    ResolutionWarning,
    StepFailureError,
    TrackingError,
)
from .model import (
    GAMMA_QUARTIC,
    DoubleWellPotential,
    MobilitySpec,
    NondimReport,
    PhaseFieldParams,
    ReactionSpec,
    SharpParams,
    derive_sharp_params,
    eval_potential,
    gamma_quadrature,
    interp_G,
    mobility_m,
    nondimensionalize,
    profile_Phi0,
    si_closed_form,
    si_quadrature,
    source_S,
    source_S1,
    source_S2,
    validate_potential,
)
from .planar import (
    ModeIndex,
    PlanarConfig,
    PlanarTrajectory,
    StabilityRow,
    amplification,
    amplification_normalized,
    beta_crit,
    enumerate_modes,
    find_stationary,
    integrate_q,
    mode_representatives,
    mu_planar,
    velocity_H,
)

__version__ = "0.1.0"

from .mesh import NodalField, StructuredMesh, build_mesh, stiffness_matrix
from .initial import init_field
from .solver import (
    RunRecord,
    SimState,
    SolverConfig,
    Stepper,
    free_energy,
    make_state,
    run_simulation,
    time_step,
)
from .analysis import (
    ConvergenceRow,
    ConvergenceTable,
    InterfaceTrace,
    ModeSpectrum,
    auto_mesh_size,
    convergence_study,
    eoc_sequence,
    fit_growth_rate,
    growth_window,
    interface_crossings,
    interface_height,
    mode_amplitudes,
    reference_front_position,
    track_interface,
)
from .config import RunConfig, parse_config, parse_epsilon
from .output import (
    Checkpoint,
    OutputOptions,
    read_checkpoint,
    write_checkpoint,
    write_diagnostics_csv,
    write_vtk,
)
