"""Exception types shared across the package."""


class AecolorError(Exception):
    """Base class for package errors."""


class GraphFormatError(AecolorError):
    """Malformed edge-list or coloring file."""


class GenerationError(AecolorError):
    """Graph generation exhausted its budget."""

    def __init__(self, message, best_girth=None):
        super().__init__(message)
        self.best_girth = best_girth


class ImproperColoringError(AecolorError):
    """Operation requires a coloring that is proper on its colored support."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = violations or []


class OracleGuardError(AecolorError):
    """Brute-force guard exceeded (instance too large for exhaustive search)."""


class ScheduleError(AecolorError):
    """Stopping rule unreachable within the iteration guard."""

    def __init__(self, message, min_reached=None, threshold=None):
        super().__init__(message)
        self.min_reached = min_reached
        self.threshold = threshold


class ReservationError(AecolorError):
    """Reserved-set resampling failed; carries the final violation report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class RegistryCapError(AecolorError):
    """Bounded cycle enumeration hit the registry size cap."""


class FinisherError(AecolorError):
    """Finishing-phase precondition or completion failure."""


class EmbedError(AecolorError):
    """Regular embedding failed a precondition or the size budget."""
