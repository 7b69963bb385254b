"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Bad dimensions, non-positive weights, malformed config keys."""


class NumericalError(RuntimeError):
    """A numerical routine failed (eigensolver breakdown, non-PSD Gramian)."""

    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class SingularGramian(NumericalError):
    """The Gramian's least eigenvalue fell below the singular threshold."""

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class SimplicityLoss(NumericalError):
    """Spectral gap too small to differentiate the least eigenvector."""


class GapViolation(NumericalError):
    """The uniform lower bound on the eigenvalues above the least one failed,
    so the cross terms of the eigenvalue derivative are not stably defined."""


class CorrectionFailed(NumericalError):
    """Gauss-Newton residual correction did not converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class TrajectoryBlowup(NumericalError):
    """State trajectory escaped in finite time during integration."""

    def __init__(self, message, escape_time=None):
        super().__init__(message)
        self.escape_time = escape_time


class BadAnchor(ConfigurationError):
    """Initial domain point does not map close enough to the path start."""


class SingularStart(ConfigurationError):
    """Initial domain point lies in the singular set."""


class InvalidXi(ConfigurationError):
    """Power-law weight with p > 1: the divergence requirement fails."""
