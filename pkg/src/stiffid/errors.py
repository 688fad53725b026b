"""Exception hierarchy. The CLI maps each branch to an exit code."""


class StiffidError(Exception):
    exit_code = 1


class ValidationError(StiffidError, ValueError):
    """Bad input: malformed spec, too few nodes or experiments."""

    exit_code = 2


class InsufficientDataError(ValidationError):
    pass


class RecommendationError(ValidationError):
    pass


class NumericalError(StiffidError, ArithmeticError):
    exit_code = 3


class DegenerateFieldError(NumericalError):
    """Rotation cannot be identified (collinear or ill-conditioned nodes)."""


class UnidentifiableError(NumericalError):
    """Wrench matrix of the experiment set is rank deficient."""


class NonPhysicalMatrixError(NumericalError):
    pass


class FieldFileError(StiffidError, OSError):
    exit_code = 4
