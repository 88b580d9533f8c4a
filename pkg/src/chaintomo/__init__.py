"""Open-system qubit dynamics on orthogonal-polynomial bath chains.

The package maps a power-law reservoir onto a nearest-neighbour bosonic
chain, evolves the joint qubit-chain state with a two-site
time-dependent variational integrator, and reconstructs phase-space
distributions of a time-adaptive collective reservoir mode, both
unconditionally and conditioned on a qubit postselection.
"""

from .conditional import (
    ConditionalBathState,
    mode_number_mpo,
    mode_occupation,
    postselect_minus_x,
    postselect_plus_x,
)
from .errors import (
    ChainTomoError,
    ConfigError,
    ConvergenceError,
    DegenerateOrbitalError,
    GridConvergenceError,
    KrylovError,
    NullBranchError,
    ResourceLimitError,
    TruncationError,
)
from .evolution import (
    ChainModel,
    EvolutionConfig,
    Tdvp2Engine,
    build_mpo,
    evolve,
    lanczos_expm_apply,
    tdvp2_sweep,
)
from .mps import (
    Mpo,
    Mps,
    TruncationPolicy,
    canonicalize,
    expectation,
    load_mps,
    mps_from_dense,
    one_body_matrix,
    overlap,
    product_state,
    save_mps,
    truncate,
)
from .observables import (
    NaturalOrbital,
    QubitMetrics,
    chain_occupations,
    hopping_guide_velocity,
    initial_orbital,
    leading_natural_orbital,
    occupation_front,
    qubit_metrics,
    reduced_qubit_density,
)
from .runner import (
    RunConfig,
    RunOutput,
    SweepSpec,
    auto_fock_dims,
    desk_config,
    estimate_memory_mb,
    paper_config,
    run_single,
    run_sweep,
    summarize_run,
)
from .spectral import (
    ChainCoefficients,
    QuadratureConfig,
    SpectralDensity,
    ThermalizedDensity,
    chain_coefficients,
)
from .wigner import (
    LambdaGrid,
    PhaseSpaceGrid,
    WignerFunction,
    characteristic_function,
    default_grids,
    displacement_blocks,
    negativity_volume,
    reconstruct_wigner,
    wigner_from_characteristic,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ChainTomoError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateOrbitalError",
    "GridConvergenceError",
    "KrylovError",
    "NullBranchError",
    "ResourceLimitError",
    "TruncationError",
    "ChainCoefficients",
    "QuadratureConfig",
    "SpectralDensity",
    "ThermalizedDensity",
    "chain_coefficients",
    "Mpo",
    "Mps",
    "TruncationPolicy",
    "canonicalize",
    "expectation",
    "load_mps",
    "mps_from_dense",
    "one_body_matrix",
    "overlap",
    "product_state",
    "save_mps",
    "truncate",
    "ChainModel",
    "EvolutionConfig",
    "Tdvp2Engine",
    "build_mpo",
    "evolve",
    "lanczos_expm_apply",
    "tdvp2_sweep",
    "NaturalOrbital",
    "QubitMetrics",
    "chain_occupations",
    "hopping_guide_velocity",
    "initial_orbital",
    "leading_natural_orbital",
    "occupation_front",
    "qubit_metrics",
    "reduced_qubit_density",
    "ConditionalBathState",
    "mode_number_mpo",
    "mode_occupation",
    "postselect_minus_x",
    "postselect_plus_x",
    "LambdaGrid",
    "PhaseSpaceGrid",
    "WignerFunction",
    "characteristic_function",
    "default_grids",
    "displacement_blocks",
    "negativity_volume",
    "reconstruct_wigner",
    "wigner_from_characteristic",
    "RunConfig",
    "RunOutput",
    "SweepSpec",
    "auto_fock_dims",
    "desk_config",
    "estimate_memory_mb",
    "paper_config",
    "run_single",
    "run_sweep",
    "summarize_run",
]
