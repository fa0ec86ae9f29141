"""Exception hierarchy.

Two families: `ConfigurationError` for bad user input (CLI exit code 2) and
`InvariantBreach` for internal consistency failures (CLI exit code 3).
"""


class ConfigurationError(ValueError):
    pass


class InvalidSpinError(ConfigurationError):
    pass


class DimensionCapError(ConfigurationError):
    pass


class NotEigenstateError(ConfigurationError):
    """Initial state is not an eigenvector of J_z."""


class InvariantBreach(RuntimeError):
    pass


class CouplingError(InvariantBreach):
    """A J^2 eigenvalue does not round to any J(J+1)."""


class ImaginaryResidueError(InvariantBreach):
    pass


class ExpansionResidualError(InvariantBreach):
    pass


class StepTooCoarseError(InvariantBreach):
    pass
