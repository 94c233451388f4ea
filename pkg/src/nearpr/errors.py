"""Exception types raised by the nearpr library."""


class NearprError(Exception):
    """Base class for all nearpr errors."""


class SingularQ(NearprError):
    """Q is numerically singular where an inverse (or E^T = Z Q^{-1}) is needed."""


class EigFailure(NearprError):
    """The symmetric eigensolver failed to converge."""


class SolverFailed(NearprError):
    """A conic/SDP solve did not reach acceptable accuracy."""


class IllConditionedX(NearprError):
    """The LMI solution X* is numerically singular (reciprocal condition below threshold)."""


class NonFiniteObjective(NearprError):
    """Objective or gradient evaluated to a non-finite value at the start point."""


class PoleAt(NearprError):
    """The pencil sE - A is numerically singular at the requested evaluation point."""

    def __init__(self, s):
        super().__init__(f"transfer function has a pole at s = {s}")
        self.s = s


class SingularPencil(NearprError):
    """(E, A) appears singular: det(lambda E - A) vanished at every probe point."""


class PreconditionViolated(NearprError):
    """A diagnostic was called on a system that violates its preconditions."""


class BisectionFailed(NearprError):
    """The bisection bracket for the requested perturbation distance could not be established."""
