"""Domain errors. Everything the toolkit raises on bad input derives from ReductionError."""


class ReductionError(ValueError):
    pass


# Graph format
class GraphFormatError(ReductionError):
    pass


class DuplicateEdgeError(GraphFormatError):
    pass


class SelfLoopError(GraphFormatError):
    pass


class VertexRangeError(GraphFormatError):
    pass


class MalformedLineError(GraphFormatError):
    pass


class InfeasibleGraphError(ReductionError):
    pass


class GenerationFailedError(ReductionError):
    pass


class LengthMismatchError(ReductionError):
    pass


# Sizes, budgets and caps
class InstanceTooLargeError(ReductionError):
    pass


# Parameters and domains
class ParameterRangeError(ReductionError):
    pass


class CloudSizeOverflowError(ParameterRangeError):
    pass


class DomainError(ReductionError):
    pass


# Linear algebra
class NonSymmetricMatrixError(ReductionError):
    pass


class EigenSolverError(ReductionError):
    pass


# Certified inequalities
class BoundViolationError(ReductionError):
    pass


class GapNotCertifiedError(BoundViolationError):
    pass
