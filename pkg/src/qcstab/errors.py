"""Exception hierarchy shared by the solvers."""


class QCError(Exception):
    """Base class for all errors raised by qcstab."""


class DomainError(QCError, ValueError):
    """A potential or energy was evaluated at a non-physical bond length."""


class InadmissibleStrain(DomainError):
    """An element (or next-nearest) bond length fell below the admissibility guard."""

    def __init__(self, message, bond=None, value=None):
        super().__init__(message)
        self.bond = bond
        self.value = value


class HypothesisError(QCError):
    """A closed-form result was requested outside the hypotheses it relies on."""


class NonConvexBond(HypothesisError):
    """The nearest-neighbour bond is not convex, phi''(F) <= 0."""


class BracketError(QCError):
    """A scalar root could not be bracketed on the search interval."""


class EigenSolverError(QCError):
    """The symmetric eigensolver failed or returned non-finite values."""


class NewtonError(QCError):
    """Base class for Newton failures; carries the last iterate."""

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class MaxIterations(NewtonError):
    pass


class SingularHessian(NewtonError):
    pass


class InadmissibleIterate(NewtonError):
    pass


class ContinuationStalled(QCError):
    """Continuation step fell below its floor before an instability was located."""

    def __init__(self, message, last_strain=None, step=None):
        super().__init__(message)
        self.last_strain = last_strain
        self.step = step
