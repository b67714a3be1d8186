"""Exception hierarchy shared by the solver, verifier and CLI."""


class SignalingError(Exception):
    """Base class. ``witness`` carries the offending point when one exists."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonFiniteEvaluation(SignalingError):
    pass


class RootNotBracketed(SignalingError):
    pass


class QuadratureFailure(SignalingError):
    pass


class DegenerateDenominator(SignalingError):
    pass


class StalledIntegration(SignalingError):
    pass


class StepUnderflow(SignalingError):
    pass


class NoPoolRoot(SignalingError):
    pass


class MultipleSignChanges(SignalingError):
    pass


class InvariantViolation(SignalingError):
    pass


class OutOfDomain(SignalingError):
    pass


class InfeasibleSeparation(SignalingError):
    pass


class SchemaError(SignalingError):
    """Config problem. ``field`` is a dotted path, ``line`` is 1-based or None."""

    def __init__(self, message, field=None, line=None):
        where = field or "<document>"
        if line is not None:
            where = f"{where} (line {line})"
        super().__init__(f"{where}: {message}")
        self.field = field
        self.line = line


class UnknownFamily(SchemaError):
    pass
