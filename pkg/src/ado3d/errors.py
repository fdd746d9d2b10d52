"""Exception types for numerical failures.

Invalid arguments raise plain ValueError; the classes here signal that a
computation started from valid inputs but broke down numerically.
"""


class NumericalError(Exception):
    """Base class for numerical failures in the solver."""


class NumericalSingularityError(NumericalError):
    """A recurrence or continued-fraction denominator vanished."""


class SpectralFailureError(NumericalError):
    """The discrete-ordinates eigenproblem produced invalid eigenvalues."""


class DegenerateModeError(NumericalError):
    """An eigenvalue was defective; the eigenvector could not be completed."""


class PoleProximityError(NumericalError):
    """A mode was evaluated too close to its real or complex pole."""


class NormalizationFailureError(NumericalError):
    """A mode normalization factor came out non-positive."""


class AssemblyError(NumericalError):
    """A quantity that must be real carried a large imaginary residue."""


class InversionFailureError(NumericalError):
    """A non-finite value appeared while assembling the inversion integral."""
