"""Shrinkage-based robust adaptive beamforming (LOCSME and LOCSME-CG).

Library plus CLI implementing the batch LOCSME beamformer, its
low-complexity conjugate-gradient variant LOCSME-CG, an SMI baseline,
and a seedable Monte-Carlo harness producing SINR-versus-snapshot and
SINR-versus-SNR curves under local-scattering steering mismatch.
"""

from .arrays import ArrayGeometry, steering_matrix, steering_vector
from .beamformers import (
    BeamformerSettings,
    IllConditionedError,
    LocsmeBatchBeamformer,
    LocsmeCgBeamformer,
    SmiBeamformer,
    implemented_algorithms,
    make_beamformer,
    mvdr_weights,
    steering_step_size,
    weight_step_size,
)
from .complexity import flop_count, flop_table, known_algorithms
from .config import ConfigError, RunConfig, parse_config
from .harness import (
    ExperimentResult,
    TrialTrace,
    monte_carlo,
    optimal_sinr,
    output_sinr,
    run_trial,
    trial_seed,
)
from .scenario import (
    CoherentScattering,
    IncoherentScattering,
    NoMismatch,
    Scenario,
    SnapshotSource,
    realize_mismatch,
    true_inc_matrix,
)
from .shrinkage import (
    SectorProjector,
    ShrinkageState,
    build_projector,
    estimate_power,
    estimate_steering,
    sector_covariance,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "BeamformerSettings",
    "CoherentScattering",
    "ConfigError",
    "ExperimentResult",
    "IllConditionedError",
    "IncoherentScattering",
    "LocsmeBatchBeamformer",
    "LocsmeCgBeamformer",
    "NoMismatch",
    "RunConfig",
    "Scenario",
    "SectorProjector",
    "ShrinkageState",
    "SmiBeamformer",
    "SnapshotSource",
    "TrialTrace",
    "build_projector",
    "estimate_power",
    "estimate_steering",
    "flop_count",
    "flop_table",
    "implemented_algorithms",
    "known_algorithms",
    "make_beamformer",
    "monte_carlo",
    "mvdr_weights",
    "optimal_sinr",
    "output_sinr",
    "parse_config",
    "realize_mismatch",
    "run_trial",
    "sector_covariance",
    "steering_matrix",
    "steering_step_size",
    "steering_vector",
    "trial_seed",
    "true_inc_matrix",
    "weight_step_size",
]
