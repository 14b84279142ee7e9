"""Exception hierarchy shared by the codec modules."""


class CodecError(Exception):
    """Base class for all codec failures."""


class CorruptStreamError(CodecError, ValueError):
    """A compressed payload is truncated, inconsistent or otherwise malformed."""


class FormatVersionError(CorruptStreamError):
    """The container was written by an unsupported format version."""


class EigenConvergenceError(CodecError, ArithmeticError):
    """The symmetric eigensolver failed or produced an inaccurate decomposition."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class DegenerateInputError(CodecError, ValueError):
    """The requested error target cannot be expressed for this input."""
