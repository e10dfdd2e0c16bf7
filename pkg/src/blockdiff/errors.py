"""Exception types shared across the package."""


class BlockdiffError(Exception):
    """Base class for all blockdiff errors."""


class InvalidDistribution(BlockdiffError):
    """An array cannot be interpreted or normalized as a probability grid."""


class InvalidPartition(BlockdiffError):
    """Grid dimensions do not divide into the requested block counts."""


class DimensionError(BlockdiffError):
    """Two objects that must share dimensions do not."""


class ZeroMassBlock(BlockdiffError):
    """A within-block conditional was requested for a block carrying no mass."""


class InfeasibleBand(BlockdiffError):
    """The tolerance band contains no probability vector."""


class SolverFailure(BlockdiffError):
    """The scaling-root bisection could not bracket or reach a root."""


class ConfigError(BlockdiffError):
    """An experiment configuration (file or flags) is invalid."""
