class ConfigError(ValueError):
    """Invalid physical or numerical configuration.

    ``field`` names the offending input so command-line front ends can
    report field-level messages.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class StepSizeError(ConfigError):
    """Time step violates the integrator step rule."""


class GridMismatchError(ValueError):
    """Two trajectories do not share a time grid."""


class TruncationError(RuntimeError):
    """Fock-space truncation is too small for the populated levels."""

    def __init__(self, message, required_n_max=None):
        self.required_n_max = required_n_max
        super().__init__(message)


class SweepPointError(RuntimeError):
    """A single sweep point failed; carries its grid coordinates."""

    def __init__(self, tau, omega, index, cause):
        self.tau = tau
        self.omega = omega
        self.index = index
        self.cause = cause
        super().__init__(
            f"sweep point {index} (tau={tau!r} ps, omega={omega!r} meV) failed: {cause}"
        )
