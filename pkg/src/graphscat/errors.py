"""Exception hierarchy shared by every module of the package."""


class GraphScatError(Exception):
    """Base class for all errors raised by graphscat."""


# graph ingestion / spectral setup
class EmptyGraph(GraphScatError, ValueError):
    pass


class NonpositiveWeight(GraphScatError, ValueError):
    pass


class DisconnectedGraph(GraphScatError, ValueError):
    pass


class SpectralGapViolation(GraphScatError, ValueError):
    pass


class EigensolverFailure(GraphScatError, RuntimeError):
    pass


class SingularWeightMatrix(GraphScatError, ValueError):
    pass


class DomainError(GraphScatError, ValueError):
    """A spectral filter took an invalid value on the spectrum."""


class DimensionMismatch(GraphScatError, ValueError):
    pass


# scattering
class InvalidPathEntry(GraphScatError, ValueError):
    pass


class PathBudgetExceeded(GraphScatError, ValueError):
    pass


# stability
class ShapeMismatch(GraphScatError, ValueError):
    pass


class SingularAlignment(GraphScatError, ValueError):
    pass


class HypothesisViolated(GraphScatError, ValueError):
    """A check was asked to run outside the hypotheses of its theorem."""


class BudgetExceeded(GraphScatError, ValueError):
    pass


# file formats / command line
class ParseError(GraphScatError, ValueError):
    pass


class LengthMismatch(GraphScatError, ValueError):
    pass


class UsageError(GraphScatError, ValueError):
    pass


class OutputError(GraphScatError, OSError):
    """A result file could not be written."""
