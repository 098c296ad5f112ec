"""Exception types shared across the package.

The hierarchy mirrors how failures are reported on the wire and by the
CLI: validation problems (bad input, malformed requests) exit with code 2,
network problems with code 3.
"""


class SseError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SseError):
    """Input violates a documented precondition."""


class DuplicateKeywordError(ValidationError):
    pass


class SeparatorInKeywordError(ValidationError):
    pass


class SeparatorInQueryError(ValidationError):
    pass


class EmptyQueryError(ValidationError):
    pass


class WeakParameterError(ValidationError):
    pass


class MalformedRequestError(ValidationError):
    """A wire request fails structural validation (token arity, widths, ...)."""


class CounterConflictError(ValidationError):
    """A posting insert targets an already-occupied counter slot."""


class RevokedKeywordError(ValidationError):
    """Re-insertion of a keyword that was previously deleted (revoked)."""


class TargetUnachievableError(SseError):
    """The bench harness could not find queries with the requested match count."""


class DecryptionFailureError(SseError):
    """Ciphertext failed to authenticate; signals corruption, not absence."""


class NotInitializedError(SseError):
    """The server has no outsourced state yet."""


class UnknownFileIdError(SseError):
    pass


class StorageError(SseError):
    """Persistence to the server's data directory failed."""


class TracingDisabledError(SseError):
    pass


class ServerUnreachableError(SseError):
    pass


class PortInUseError(SseError):
    pass
