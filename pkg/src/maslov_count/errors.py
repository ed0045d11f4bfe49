"""Exception types shared across the package."""


class MaslovCountError(Exception):
    """Base class for all package errors."""


class RankDeficientError(MaslovCountError):
    """Candidate frame has (numerically) dependent columns."""

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class NotLagrangianError(MaslovCountError):
    """Candidate frame violates X*Y - Y*X = 0 beyond tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DimensionMismatchError(MaslovCountError):
    """Operands have incompatible shapes."""


class StepSizeUnderflowError(MaslovCountError):
    """Adaptive integrator drove the step size to zero."""


class ToleranceNotMetError(MaslovCountError):
    """Integrator finished without reaching the requested accuracy."""


class RefinementLimitError(MaslovCountError):
    """Eigenphase path too wild to resolve at the permitted resolution."""


class IndeterminateCrossingError(MaslovCountError):
    """A phase track grazes the target point but its direction cannot
    be resolved after refinement."""


class IndefiniteDirectionError(MaslovCountError):
    """An eigenvalue track of the projected direction matrix changes
    sign on both sides of the crossing."""


class NonIsolatedIntersectionError(MaslovCountError):
    """Kernel dimension persists over a parameter interval; the pair of
    paths does not have isolated conjugate points."""


class AssumptionFailureError(MaslovCountError):
    """A required structural assumption failed its sampled check."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ShelfMismatchError(MaslovCountError):
    """Maslov-box shelves disagree with the expected identities."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class WindowTouchesEssentialSpectrumError(MaslovCountError):
    """Requested spectral window intersects the essential spectrum of
    the algebraic block."""

    def __init__(self, message, intervals=None):
        super().__init__(message)
        self.intervals = intervals


class AmbiguousNearEndpointError(MaslovCountError):
    """A discrete eigenvalue sits too close to a window endpoint to
    count reliably at the given mesh."""

    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class ResolutionTooCoarseError(MaslovCountError):
    """Curve linking was ambiguous at the requested scan resolution."""


class UnsupportedForOracleError(MaslovCountError):
    """The finite-difference oracle does not cover this system or
    boundary-condition form."""


class ConfigError(MaslovCountError):
    """Configuration text failed to parse or validate."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ExpressionError(MaslovCountError):
    """Coefficient expression failed to tokenize, parse, or evaluate."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position
