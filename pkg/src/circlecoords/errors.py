"""Exception hierarchy shared by every stage of the pipeline."""


class CircleCoordsError(Exception):
    """Base class; the CLI maps it to exit code 1."""

    exit_code = 1


class ZeroVarianceError(CircleCoordsError):
    pass


class FiltrationTooLarge(CircleCoordsError):
    pass


class NoLoopDetected(CircleCoordsError):
    exit_code = 2


class LiftFailure(CircleCoordsError):
    def __init__(self, message, triangles=()):
        super().__init__(message)
        self.triangles = list(triangles)


class SolverFailure(CircleCoordsError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class EmptyDomainError(CircleCoordsError):
    pass


class DegenerateEnsemble(CircleCoordsError):
    exit_code = 3

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)
