"""Exception hierarchy.

``InputError`` covers malformed or inconsistent inputs; ``NumericalError`` and
its subclasses cover failures that only show up while computing.
"""


class IsoperiError(Exception):
    """Base class for all package errors."""


class InputError(IsoperiError, ValueError):
    """Invalid input: wrong dimensions, broken invariants, unparsable files."""


class ResolutionError(InputError):
    """A Fourier curve was sampled with too few points."""


class NumericalError(IsoperiError, ArithmeticError):
    """A numerical procedure broke down."""


class DegeneracyError(NumericalError):
    """The constraint Jacobian lost rank.

    Attributes
    ----------
    planes : list of tuple
        Constraints (axis planes, or ``"omega"``) involved in the deficiency.
    """

    def __init__(self, message, planes=()):
        super().__init__(message)
        self.planes = list(planes)


class ProjectionError(NumericalError):
    """Newton projection onto the constraint set did not converge."""


class PreconditionError(NumericalError):
    """A curve handed to the stability analysis is not first-order stationary."""
