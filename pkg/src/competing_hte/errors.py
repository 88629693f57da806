"""Exception types raised across the package."""


class CompetingHTEError(Exception):
    """Base class for all package errors."""


class ConfigError(CompetingHTEError, ValueError):
    """Invalid data-generating or experiment configuration."""


class DataError(CompetingHTEError, ValueError):
    """Malformed input data (CSV ingestion, trajectories)."""


class MalformedTrajectory(DataError):
    pass


class ShapeError(CompetingHTEError, ValueError):
    pass


class EmptyAtRiskSet(CompetingHTEError, ValueError):
    pass


class SingleArmError(CompetingHTEError, ValueError):
    pass


class DegenerateDistribution(CompetingHTEError, ValueError):
    pass


class DegenerateWeights(CompetingHTEError, ValueError):
    pass


class PositivityError(CompetingHTEError, ValueError):
    pass


class InsufficientReplications(CompetingHTEError, ValueError):
    pass


class ConstantFeatureError(CompetingHTEError, ValueError):
    pass
