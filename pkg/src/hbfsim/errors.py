"""Exception types shared across the simulator."""


class SimulationError(ValueError):
    """Base class for all hbfsim errors."""


class DimensionError(SimulationError):
    """Array shapes or antenna counts violate a structural requirement."""


class ParameterError(SimulationError):
    """A scalar argument is outside its admissible range."""


class ChannelFileError(SimulationError):
    """Malformed channel CSV.  Carries 1-based line/column when known."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class MissingPathsError(SimulationError):
    """An operation that needs multipath parameters got an empty path set."""


class SingularCombinerError(SimulationError):
    """Receive combiner is rank deficient."""


class DegenerateChannelError(SimulationError):
    """Channel rank too low for the requested number of streams."""


class DegenerateAnalogError(SimulationError):
    """Analog precoding matrix is identically zero."""


class UnsupportedModeError(SimulationError):
    """Requested CSI mode is not available for this channel source."""


class ConfigError(SimulationError):
    """Bad experiment configuration file."""
