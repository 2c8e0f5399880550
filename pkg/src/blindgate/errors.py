"""Exception types shared across the toolkit."""


class BlindgateError(Exception):
    """Base class for toolkit-specific failures."""


class DimensionError(BlindgateError, ValueError):
    """Operands act on registers of incompatible sizes."""


class CapacityError(BlindgateError, ValueError):
    """Requested register exceeds the dense-simulation cap."""


class PreconditionError(BlindgateError, ValueError):
    """A documented precondition of an operation was violated."""


class NotRealizableError(BlindgateError, ValueError):
    """Gate sits too high in the hierarchy for the requested compilation."""


class CircuitParseError(BlindgateError, ValueError):
    """Circuit text could not be parsed.  Carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MalformedWitnessError(BlindgateError, ValueError):
    """A claimed witness is structurally invalid (as opposed to merely wrong)."""


class EntanglementError(BlindgateError, RuntimeError):
    """A register section expected to be in a product state was not."""


class ProtocolAbort(BlindgateError, RuntimeError):
    """The helper walked away mid-protocol.  Carries the partial transcript."""

    def __init__(self, message: str, transcript=None):
        super().__init__(message)
        self.transcript = transcript
