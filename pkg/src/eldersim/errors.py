"""Exception hierarchy for the monitoring pipeline and simulator."""


class ElderSimError(Exception):
    """Base class for all package errors."""


class RejectedReadingError(ElderSimError):
    """A sensor reading violated its payload or timestamp invariants."""


class NoDataError(ElderSimError):
    """An aggregation was requested over an empty measurement list."""


class OrderingError(ElderSimError):
    """A timestamped append would break monotonic ordering."""


class TransitionError(ElderSimError):
    """An illegal notification status transition was attempted."""


class TraceParseError(ElderSimError):
    """A trace file line could not be parsed; message names the line."""


class ConfigError(ElderSimError):
    """A configuration value failed validation; message names the field."""
