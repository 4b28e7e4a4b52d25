"""Exception hierarchy shared by the library and the command line.

Every error knows the process exit code the CLI maps it to: 3 for bad
input, 4 for numerical failures."""


class IBError(Exception):
    exit_code = 1


# Input errors
class InputError(IBError):
    exit_code = 3


class ProblemFormatError(InputError):
    """A problem definition could not be parsed or failed validation.
    Carries the offending column index or the JSON line/column when known."""

    def __init__(self, message, index=None, line=None, column=None):
        super().__init__(message)
        self.index = index
        self.line = line
        self.column = column


class NormalizationError(InputError):
    pass


class ShapeMismatchError(InputError):
    pass


# Numerical errors
class NumericalError(IBError):
    exit_code = 4


class DivergenceInfiniteError(NumericalError):
    pass


class ZeroMassClusterError(NumericalError):
    def __init__(self, cluster):
        super().__init__("Cluster {} has zero mass; reduce the root first".format(cluster))
        self.cluster = cluster


class PositivityError(NumericalError):
    pass


class SingularMatrixError(NumericalError):
    pass


class NearBifurcationError(NumericalError):
    """Raised when sigma_min(I - S) falls below the refusal threshold.
    The ODE solution computed anyway is attached as `solution`."""

    def __init__(self, singular_metric, solution=None):
        super().__init__("IB ODE is nearly singular (sigma_min(I - S) = {:.3e})".format(singular_metric))
        self.singular_metric = singular_metric
        self.solution = solution


class StepTooLargeError(NumericalError):
    pass


class CannotReduceError(NumericalError):
    pass


class EmptyRootError(NumericalError):
    pass


class RangeError(NumericalError):
    pass


class BranchError(NumericalError):
    pass


class TooLargeError(NumericalError):
    pass


class PartialSpectrumError(NumericalError):
    pass
