"""Block-partitioned probability grids, leak-tolerant KL projection, and
toy reverse-diffusion experiments."""

from .dynamics import (
    ForwardParams,
    ReverseParams,
    forward_block_blur,
    gaussian_kernel,
    reverse_step,
    run_forward,
    run_reverse_pair,
)
from .errors import (
    BlockdiffError,
    ConfigError,
    DimensionError,
    InfeasibleBand,
    InvalidDistribution,
    InvalidPartition,
    SolverFailure,
    ZeroMassBlock,
)
from .experiments import (
    ExperimentConfig,
    TrajectoryRecord,
    emit_csv,
    emit_snapshot,
    load_config,
    make_data_image,
    make_initial_noise,
    read_grid,
    read_series_csv,
    run_forward_experiment,
    run_restore_experiment,
    write_grid_csv,
    write_series_csv,
)
from .grid import (
    EPS_PMF,
    BlockPartition,
    MassVector,
    PmfGrid,
    block_conditional,
    block_masses,
    make_partition,
    normalize,
)
from .potentials import (
    ToleranceBand,
    WStarSolution,
    e_block,
    e_pix,
    kl_divergence,
    potential_v,
    potential_v_delta,
    solve_w_star,
)
from .projection import is_in_band, project

__version__ = "0.1.0"

__all__ = [
    "BlockPartition",
    "BlockdiffError",
    "ConfigError",
    "DimensionError",
    "EPS_PMF",
    "ExperimentConfig",
    "ForwardParams",
    "InfeasibleBand",
    "InvalidDistribution",
    "InvalidPartition",
    "MassVector",
    "PmfGrid",
    "ReverseParams",
    "SolverFailure",
    "ToleranceBand",
    "TrajectoryRecord",
    "WStarSolution",
    "ZeroMassBlock",
    "block_conditional",
    "block_masses",
    "e_block",
    "e_pix",
    "emit_csv",
    "emit_snapshot",
    "forward_block_blur",
    "gaussian_kernel",
    "is_in_band",
    "kl_divergence",
    "load_config",
    "make_data_image",
    "make_initial_noise",
    "make_partition",
    "normalize",
    "potential_v",
    "potential_v_delta",
    "project",
    "read_grid",
    "read_series_csv",
    "reverse_step",
    "run_forward",
    "run_forward_experiment",
    "run_restore_experiment",
    "run_reverse_pair",
    "solve_w_star",
    "write_grid_csv",
    "write_series_csv",
]
