"""Exception types shared across the package."""


class SingularTraceError(ArithmeticError):
    """Raised when a trace needed as a divisor is numerically zero.

    Carries the evolution time at which the breakdown occurred so that
    callers (and the CLI) can report where a trajectory became unusable.
    """

    def __init__(self, time: float, trace: complex):
        self.time = float(time)
        self.trace = complex(trace)
        super().__init__(
            f"state trace {self.trace:.3e} is below the invertibility "
            f"threshold at t={self.time:.6g}"
        )


class DegenerateLimitError(ValueError):
    """Raised when a long-time limit is requested at parameters where the
    closed-form limit expressions lose their dominant-balance assumption."""


class ConfigError(ValueError):
    """Raised for malformed CLI/config-file input."""
