"""Exception types shared across the library and mapped to CLI exit codes."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration input (CLI exit code 2)."""


class ConvergenceError(RuntimeError):
    """An iterative numerical procedure failed to reach its target (exit code 3)."""


class QuadratureConvergenceError(ConvergenceError):
    """Doubling the quadrature nodes still changes the result too much."""


class CapacityError(RuntimeError):
    """A requested Hilbert-space sector exceeds the configured cap (exit code 4)."""


class DegenerateProjectionError(ValueError):
    """Postselection onto a sector carrying (numerically) zero probability."""


class ScheduleRangeError(ValueError):
    """A requested time lies outside every segment of a drive schedule."""


class CoverageError(ValueError):
    """A trajectory does not contain the snapshots a consumer requires."""


class NoCrossingError(ValueError):
    """A scan grid never crosses half maximum on one side of the peak."""
