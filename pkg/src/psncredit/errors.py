"""Exception hierarchy shared across the package.

``Rejection`` subclasses carry a stable wire code so a rejection raised by
the server can be reconstructed as the same exception type on the client
side of any transport (in-process bus or HTTP).
"""

from __future__ import annotations


class PsnError(Exception):
    """Base class for every error raised by this package."""


class FramingError(PsnError):
    """A byte string does not match the canonical framing it claims."""


class MalformedToken(FramingError):
    """Token bytes failed to deserialize (bad tag, framing, or trailing data)."""


class MalformedMessage(FramingError):
    """A protocol message payload failed to decode."""


class KeyGenError(PsnError):
    """Key generation could not satisfy its constraints."""


class DerivedExponentCollision(PsnError):
    """A derived verification exponent divides the key's totient.

    Signals a mis-generated signing key: the modulus factors are too small
    for the configured exponent bit length.
    """


class ScenarioError(PsnError):
    """A simulation scenario is malformed."""


class HorizonTooTight(PsnError):
    """Deposit schedule cannot fit the required minimum gaps before the horizon."""


class DuplicateTaskRequest(PsnError):
    """The participant already holds a session for this task."""


class NoSession(PsnError):
    """The participant has no request-token session for this task."""


class Rejection(PsnError):
    """A server-side rejection that crosses the transport boundary.

    Each concrete subclass has a ``code`` used on the wire; clients map the
    code back to the subclass and re-raise it.
    """

    code = "rejected"


# ``except ServerRejected`` catches any typed server rejection.
ServerRejected = Rejection


class InvalidSignature(Rejection):
    code = "invalid_signature"


class ReusedRequestToken(Rejection):
    code = "reused_request_token"


class ReusedReportToken(Rejection):
    code = "reused_report_token"


class UnknownTask(Rejection):
    code = "unknown_task"


class TaskClosed(Rejection):
    code = "task_closed"


class BatchMismatch(Rejection):
    code = "batch_mismatch"


class StaleTimestamp(Rejection):
    code = "stale_timestamp"


class ExpiredTimestamp(Rejection):
    code = "expired_timestamp"


class IdentityMismatch(Rejection):
    code = "identity_mismatch"


class DoubleDeposit(Rejection):
    code = "double_deposit"


class WindowStillOpen(Rejection):
    code = "window_still_open"


class WindowNotFinished(Rejection):
    code = "window_not_finished"


class DecryptionFailure(Rejection):
    code = "decryption_failure"


class MalformedPreimage(Rejection):
    """Credit-token preimage bytes do not parse as digest + canonical integer."""

    code = "malformed_preimage"


class MalformedRequest(Rejection):
    """Structurally invalid request (out-of-range group element, bad sizes)."""

    code = "malformed_request"


def _collect_codes() -> dict[str, type]:
    table: dict[str, type] = {}
    stack = [Rejection]
    while stack:
        cls = stack.pop()
        table[cls.code] = cls
        stack.extend(cls.__subclasses__())
    return table


REJECTION_BY_CODE = _collect_codes()


def rejection_from_code(code: str, detail: str = "") -> Rejection:
    """Rebuild the typed rejection for a wire code (unknown codes get the base)."""
    cls = REJECTION_BY_CODE.get(code, Rejection)
    return cls(detail or code)
