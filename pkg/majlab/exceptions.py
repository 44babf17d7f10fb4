"""Exceptions raised by majlab."""


class MajlabError(Exception):
    """Base class of all majlab errors."""


class DimensionError(MajlabError, ValueError):
    """Matrix or vector shapes do not fit together."""


class HermitianError(MajlabError, ValueError):
    """A matrix is too far from its adjoint to be accepted as Hermitian."""


class ConvergenceError(MajlabError, ArithmeticError):
    """The Jacobi eigensolver did not converge within the allowed sweeps."""


class PreconditionError(MajlabError, ValueError):
    """An operation was called outside of its domain."""


class AlphabetError(MajlabError, ValueError):
    """Noncommutative polynomials over different alphabets were combined."""


class ReportError(MajlabError, ValueError):
    """A report file could not be parsed."""
