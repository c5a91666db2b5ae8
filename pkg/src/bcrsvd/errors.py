"""Exception hierarchy.

Validation problems derive from :class:`DomainError` (a ``ValueError``) so
callers can catch bad input with one clause. Numerical self-checks that should
never fire on correct code derive from :class:`NumericalError`.
"""


class RSvDError(Exception):
    """Base class for all package errors."""


class DomainError(RSvDError, ValueError):
    """Input outside the admissible domain."""


class NonFinite(DomainError):
    pass


class ZeroCoupling(DomainError):
    pass


class SignViolation(DomainError):
    pass


class OrderingViolation(DomainError):
    pass


class NonPositive(DomainError):
    pass


class LengthMismatch(DomainError):
    pass


class EmptyVector(DomainError):
    pass


class InvalidArgument(DomainError):
    pass


class NumericalError(RSvDError, ArithmeticError):
    """A numerical invariant failed beyond tolerance."""


class ImaginaryResidual(NumericalError):
    pass


class StructuralResidual(NumericalError):
    pass


class EigensolverFailure(NumericalError):
    pass


class PositivityViolation(NumericalError):
    pass


class PairingFailure(NumericalError):
    pass


class DegenerateAction(NumericalError):
    pass


class IdentityFailure(NumericalError):
    pass


class ChamberExit(NumericalError):
    """The integrated trajectory left the Weyl chamber.

    ``trajectory`` holds the partial result up to the exit.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StepUnderflow(NumericalError):
    pass


class NotAsymptotic(NumericalError):
    pass
