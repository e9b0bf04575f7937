"""Exception hierarchy shared by every module of the package."""


class NodeGlueError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(NodeGlueError, ValueError):
    pass


class NumericFailureError(NodeGlueError, ArithmeticError):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class IllConditionedInputError(NodeGlueError, ValueError):
    pass


class AmbiguousPoleError(NodeGlueError, ValueError):
    pass


class PathThroughPoleError(NodeGlueError, ValueError):
    pass


class SingularPointError(NodeGlueError, ValueError):
    pass


class OutOfGluingRegionError(NodeGlueError, ValueError):
    pass


class DegenerateConfigurationError(NodeGlueError, ValueError):
    pass


class LabelingAmbiguityError(NodeGlueError, ValueError):
    pass


class TrackingError(NodeGlueError, ValueError):
    pass


class CriticalLevelError(NodeGlueError, ValueError):
    pass


class NoisyJacobianError(NodeGlueError, ArithmeticError):
    pass


class EmbeddednessConditionError(NodeGlueError, ValueError):
    def __init__(self, message, minimal_m):
        super().__init__(message)
        self.minimal_m = minimal_m


class InvalidActionError(NodeGlueError, ValueError):
    pass


class ScheduleError(NodeGlueError, ValueError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index
