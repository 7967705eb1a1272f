"""Exception hierarchy shared by all modules."""


class BeltramiError(Exception):
    """Base class for every error raised by the package."""


class GridError(BeltramiError, ValueError):
    """Grid construction violated an invariant."""


class NonFiniteInput(BeltramiError, ValueError):
    pass


class NotUnit(BeltramiError, ValueError):
    pass


class ParseError(BeltramiError, ValueError):
    """Expression text could not be parsed.

    ``offset`` is the byte offset of the offending token and ``expected`` the
    set of token kinds that would have been accepted there.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        detail = f"{message} at offset {offset}"
        if exp:
            detail += f" (expected one of: {exp})"
        super().__init__(detail)


class UnboundVariable(BeltramiError, KeyError):
    def __str__(self):
        return f"unbound variable {self.args[0]!r}"


class DomainError(BeltramiError, ValueError):
    pass


class GradientTooSmall(BeltramiError):
    pass


class AmbiguousPrincipalDirections(BeltramiError):
    pass


class StepOutOfDomain(BeltramiError):
    pass


class IncompatibleInitialData(BeltramiError):
    pass


class U3Vanished(BeltramiError):
    pass


class BlowUp(BeltramiError):
    pass


class NewtonDiverged(BeltramiError):
    """Damped Newton failed; ``history`` holds the residual sup-norms."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class CRViolation(BeltramiError, ValueError):
    pass


class NotHarmonic(BeltramiError, ValueError):
    pass
