"""Alpha-modulation decompositions, norms, and NLS experiments on the periodic box."""

from .grid import (
    AliasingError,
    Explicit,
    Field,
    FieldSpec,
    FourierBump,
    Gaussian,
    GridSpec,
    PlaneWave,
    SpectralField,
    SumOfBumps,
    make_grid,
    sample,
    to_physical,
    to_spectral,
)
from .decomp import (
    BumpProfile,
    CoverageError,
    DecompositionSymbols,
    alpha_center,
    alpha_radius,
    alpha_symbols,
    apply_projector,
    calibrate_constant,
    dyadic_symbols,
    eta_alpha,
    make_bump,
    partition_residual,
    phi_alpha,
)
from .norms import (
    NormReport,
    ZeroModeError,
    besov_norm,
    dyadic_shell_masses,
    embedding_report,
    lp_norm,
    modulation_norm,
    norm_report,
    p_variation,
    sobolev_norm,
)
from .evolve import (
    BlowupDetected,
    ContractionFailure,
    EvolutionConfig,
    PicardResult,
    Trajectory,
    energy,
    evolve,
    free_propagate,
    glassey_report,
    load_snapshot,
    mass,
    picard_solve,
    save_snapshot,
    scaling_transform,
)
from .estimates import (
    AdmissiblePair,
    BilinearExperiment,
    bilinear_measure,
    bilinear_oracle_1d,
    bilinear_sweep,
    space_time_norm,
    strichartz_sweep,
)
from .construct import (
    IllposedDataSpec,
    SupercriticalDataSpec,
    WindowEmpty,
    build_illposed_v0,
    build_supercritical_u0,
    choose_kj,
    critical_index,
    discontinuity_demo,
    inflation_sweep,
    norm_claim_report,
    scaled_data,
    taylor_coefficient,
    threshold_index,
)
from .report import CheckResult, ExperimentReport
from .schemas import COMMAND_SCHEMAS, ConfigError, resolve_config

__version__ = "0.1.0"
