"""Exception hierarchy.

Each family carries the process exit code the CLI maps it to.
"""


class TwinbeamError(Exception):
    exit_code = 1


class ConfigError(TwinbeamError):
    """Scenario or configuration problem (missing section, bad key, bad type)."""

    exit_code = 2

    def __init__(self, message, key_path=None):
        self.key_path = key_path
        if key_path:
            message = f"{key_path}: {message}"
        super().__init__(message)


class PhysicsError(TwinbeamError):
    """A physical invariant or precondition is violated."""

    exit_code = 3


class InvalidElementError(PhysicsError):
    pass


class PropagationSingularityError(PhysicsError):
    pass


class InstabilityError(PhysicsError):
    def __init__(self, half_trace):
        self.half_trace = float(half_trace)
        super().__init__(f"cavity is unstable: |(A+D)/2| = {abs(self.half_trace):.6g} >= 1")


class IncompatibleBeamsError(PhysicsError):
    pass


class DomainError(PhysicsError):
    pass


class CalibrationError(PhysicsError):
    pass


class UnphysicalInputError(PhysicsError):
    pass


class LockLostError(PhysicsError):
    pass


class AnalysisError(TwinbeamError):
    """Signal-analysis failure (sampling, grid, record length)."""

    exit_code = 4


class AliasingError(AnalysisError):
    pass


class InsufficientSamplesError(AnalysisError):
    pass


class GridMismatchError(AnalysisError):
    pass
