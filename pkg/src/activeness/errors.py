"""Exception hierarchy shared by the library and the CLI."""


class ActivenessError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ActivenessError, ValueError):
    """Input violates a documented invariant. The CLI maps this to exit code 1."""


class TransportError(ActivenessError):
    """A remote registry could not be reached or answered outside the protocol.

    The CLI maps this to exit code 2. It is never folded into "not found".
    """


class NondeterministicLookupError(ActivenessError):
    """Repeated lookups of one name disagreed on whether it exists."""


class EvaluationAborted(TransportError):
    """Transport failure in the middle of a library evaluation.

    ``partial`` holds the report built from the rows completed before the failure.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
