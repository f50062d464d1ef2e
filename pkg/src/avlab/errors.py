"""Exception hierarchy shared across the lab."""


class AvlabError(Exception):
    """Base class for all package errors."""


class ConfigError(AvlabError):
    """Invalid or inconsistent configuration (bad value, unknown key, missing file)."""


class UsageError(AvlabError):
    """API called out of contract (step after done, dimension mismatch, ...)."""


class DynamicsFault(AvlabError):
    """Non-finite state or command reached the simulator."""


class DegenerateGeometryError(AvlabError):
    """Vehicle coincident with the landmark; range-bearing measurement undefined."""


class FilterDivergenceError(AvlabError):
    """Innovation covariance is numerically unusable; the filter has diverged."""


class UndefinedMetricError(AvlabError):
    """Metric requested over a trace set containing no attacked steps."""


class TrainingFault(AvlabError):
    """Non-finite loss or gradient during an update; parameters were rolled back."""


class CheckpointError(ConfigError):
    """Checkpoint file rejected (bad magic, version mismatch, truncated payload)."""


class TraceFormatError(ConfigError):
    """Trace CSV malformed; carries the first offending row."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row
