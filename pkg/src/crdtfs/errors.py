"""Exception hierarchy shared by every layer."""


class CrdtfsError(Exception):
    """Base class for all errors raised by this package."""


class PathError(CrdtfsError, ValueError):
    """Malformed textual path."""

    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(f"{reason} at position {position} in {text!r}")


class NotFoundError(CrdtfsError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class PreconditionError(CrdtfsError):
    """A local operation was rejected; ``clause`` names the violated condition."""

    def __init__(self, clause: str, detail: str = ""):
        self.clause = clause
        self.detail = detail
        super().__init__(f"precondition violated: {clause}" + (f" ({detail})" if detail else ""))


class AmbiguityError(CrdtfsError):
    """A view path matches several nodes; the caller must pass an origin."""


class ContractViolation(CrdtfsError):
    """A delivery contract (exactly-once or causal order) was broken."""


class StuckScheduleError(CrdtfsError):
    """Undelivered envelopes remain but none is deliverable."""


class UsageError(CrdtfsError):
    pass
