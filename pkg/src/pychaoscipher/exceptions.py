class MalformedMessageError(ValueError):
    """Sealed message too short to contain an IV and a tag."""

    def __init__(self) -> None:
        super().__init__("malformed message")


class AuthenticationFailedError(ValueError):
    """Tag verification failed."""

    def __init__(self) -> None:
        super().__init__("authentication failed")


class NotApplicableError(ValueError):
    ...


class RejectionLimitError(RuntimeError):
    ...


class EntropySourceError(RuntimeError):
    ...
