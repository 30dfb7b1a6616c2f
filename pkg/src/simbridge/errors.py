"""Exception types shared across the package."""


class SimBridgeError(Exception):
    """Base class for all package errors."""


class DescriptionError(SimBridgeError):
    """Raised when a robot/scenario document fails to parse or validate.

    ``problems`` carries one message per violation so callers can report
    everything at once instead of fixing errors one by one.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class MergeError(SimBridgeError):
    """Raised when scene merging fails (duplicate instance names etc.)."""


class DatastoreError(SimBridgeError):
    """Raised on datastore misuse: missing key, type mismatch, bad call."""


class PhysicsError(SimBridgeError):
    """Raised when a physics step is rejected (non-finite command, bad joint)."""


class CommandError(SimBridgeError):
    """Raised when an operator command is rejected at validation time."""


class ProtocolError(SimBridgeError):
    """Raised when a wire message cannot be decoded."""
