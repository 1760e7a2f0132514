"""Exception types raised by fastrpb."""


class OracleSizeError(ValueError):
    """A dense oracle was asked for a problem too large to materialize."""


class NumericalDegeneracyError(ArithmeticError):
    """A computation hit a non-positive or non-finite normalizer."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class SpectralResidueError(ArithmeticError):
    """The imaginary part left by a real-valued FFT product was too large."""


class GoldenFormatError(ValueError):
    """A golden CSV file is malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InsufficientDataError(ValueError):
    """Not enough distinct sizes to fit a scaling exponent."""


class OracleMismatchError(AssertionError):
    """A fast path disagreed with its dense oracle."""
