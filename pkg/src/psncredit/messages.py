"""Protocol messages and their canonical byte form.

Every exchange is a request dataclass paired with a response dataclass.
The byte form feeds three consumers: the transport (so simulated links
carry the same bytes an HTTP client would), the server transcript (what an
observer of the server sees), and communication-cost accounting.

Tags sit in a separate range from token kind tags.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .encoding import ByteReader, encode_bytes, encode_int, encode_ticks
from .errors import FramingError, MalformedMessage
from .tokens import (
    CreditToken,
    ReportToken,
    RequestToken,
    Token,
    token_from_bytes,
)

TAG_IDENTITY_REQUEST = 0x10
TAG_IDENTITY_GRANT = 0x11
TAG_TOKEN_SIGN_REQUEST = 0x12
TAG_TOKEN_SIGN_GRANT = 0x13
TAG_TASK_REQUEST = 0x14
TAG_TASK_GRANT = 0x15
TAG_REPORT_SUBMIT = 0x16
TAG_REPORT_GRANT = 0x17
TAG_CREDIT_DEPOSIT = 0x18
TAG_DEPOSIT_RECEIPT = 0x19
TAG_COMPLETE_TASK = 0x1A
TAG_EXPIRE_WINDOW = 0x1B
TAG_OK = 0x1C
TAG_ERROR = 0x1F


@dataclass(frozen=True)
class IdentityRequest:
    rid: bytes

    def to_bytes(self) -> bytes:
        return bytes([TAG_IDENTITY_REQUEST]) + encode_bytes(self.rid)


@dataclass(frozen=True)
class IdentityGrant:
    rid_sig: int

    def to_bytes(self) -> bytes:
        return bytes([TAG_IDENTITY_GRANT]) + encode_int(self.rid_sig)


@dataclass(frozen=True)
class TokenSignRequest:
    pseudonym: bytes
    task_index: int
    blinded: int
    kind: int

    def to_bytes(self) -> bytes:
        return (
            bytes([TAG_TOKEN_SIGN_REQUEST])
            + encode_bytes(self.pseudonym)
            + encode_int(self.task_index)
            + encode_int(self.blinded)
            + encode_int(self.kind)
        )


@dataclass(frozen=True)
class TokenSignGrant:
    sig: int

    def to_bytes(self) -> bytes:
        return bytes([TAG_TOKEN_SIGN_GRANT]) + encode_int(self.sig)


@dataclass(frozen=True)
class TaskRequest:
    pseudonym: bytes
    token: RequestToken

    def to_bytes(self) -> bytes:
        return (
            bytes([TAG_TASK_REQUEST])
            + encode_bytes(self.pseudonym)
            + encode_bytes(self.token.to_bytes())
        )


@dataclass(frozen=True)
class TaskGrant:
    task_index: int
    c_max: int
    query: bytes

    def to_bytes(self) -> bytes:
        return (
            bytes([TAG_TASK_GRANT])
            + encode_int(self.task_index)
            + encode_int(self.c_max)
            + encode_bytes(self.query)
        )


@dataclass(frozen=True)
class ReportSubmit:
    pseudonym: bytes
    token: ReportToken
    blinded: tuple[int, ...]
    ticks: int
    ciphertext: bytes

    def to_bytes(self) -> bytes:
        parts = [
            bytes([TAG_REPORT_SUBMIT]),
            encode_bytes(self.pseudonym),
            encode_bytes(self.token.to_bytes()),
            encode_int(len(self.blinded)),
        ]
        parts.extend(encode_int(mu) for mu in self.blinded)
        parts.append(encode_ticks(self.ticks))
        parts.append(encode_bytes(self.ciphertext))
        return b"".join(parts)


@dataclass(frozen=True)
class ReportGrant:
    granted: int
    sigs: tuple[int, ...]

    def to_bytes(self) -> bytes:
        parts = [bytes([TAG_REPORT_GRANT]), encode_int(self.granted), encode_int(len(self.sigs))]
        parts.extend(encode_int(s) for s in self.sigs)
        return b"".join(parts)


@dataclass(frozen=True)
class CreditDeposit:
    rid: bytes
    token: CreditToken

    def to_bytes(self) -> bytes:
        return (
            bytes([TAG_CREDIT_DEPOSIT])
            + encode_bytes(self.rid)
            + encode_bytes(self.token.to_bytes())
        )


@dataclass(frozen=True)
class DepositReceipt:
    balance: int

    def to_bytes(self) -> bytes:
        return bytes([TAG_DEPOSIT_RECEIPT]) + encode_int(self.balance)


@dataclass(frozen=True)
class CompleteTask:
    task_index: int

    def to_bytes(self) -> bytes:
        return bytes([TAG_COMPLETE_TASK]) + encode_int(self.task_index)


@dataclass(frozen=True)
class ExpireWindow:
    window: int

    def to_bytes(self) -> bytes:
        return bytes([TAG_EXPIRE_WINDOW]) + encode_int(self.window)


@dataclass(frozen=True)
class Ok:
    def to_bytes(self) -> bytes:
        return bytes([TAG_OK])


@dataclass(frozen=True)
class ErrorResponse:
    code: str
    detail: str = field(default="")

    def to_bytes(self) -> bytes:
        return (
            bytes([TAG_ERROR])
            + encode_bytes(self.code.encode())
            + encode_bytes(self.detail.encode())
        )


Message = (
    IdentityRequest
    | IdentityGrant
    | TokenSignRequest
    | TokenSignGrant
    | TaskRequest
    | TaskGrant
    | ReportSubmit
    | ReportGrant
    | CreditDeposit
    | DepositReceipt
    | CompleteTask
    | ExpireWindow
    | Ok
    | ErrorResponse
)


def _read_token(r: ByteReader, want: type) -> Token:
    tok = token_from_bytes(r.read_bytes())
    if not isinstance(tok, want):
        raise MalformedMessage(f"expected {want.__name__}, got {type(tok).__name__}")
    return tok


def message_from_bytes(raw: bytes) -> Message:
    if not raw:
        raise MalformedMessage("empty message")
    tag = raw[0]
    r = ByteReader(raw[1:])
    try:
        msg = _decode_body(tag, r)
        r.expect_end()
    except MalformedMessage:
        raise
    except (FramingError, UnicodeDecodeError) as exc:
        raise MalformedMessage(str(exc)) from exc
    return msg


def _decode_body(tag: int, r: ByteReader) -> Message:
    if tag == TAG_IDENTITY_REQUEST:
        return IdentityRequest(rid=r.read_bytes())
    if tag == TAG_IDENTITY_GRANT:
        return IdentityGrant(rid_sig=r.read_int())
    if tag == TAG_TOKEN_SIGN_REQUEST:
        return TokenSignRequest(
            pseudonym=r.read_bytes(),
            task_index=r.read_int(),
            blinded=r.read_int(),
            kind=r.read_int(),
        )
    if tag == TAG_TOKEN_SIGN_GRANT:
        return TokenSignGrant(sig=r.read_int())
    if tag == TAG_TASK_REQUEST:
        pid = r.read_bytes()
        tok = _read_token(r, RequestToken)
        return TaskRequest(pseudonym=pid, token=tok)
    if tag == TAG_TASK_GRANT:
        return TaskGrant(task_index=r.read_int(), c_max=r.read_int(), query=r.read_bytes())
    if tag == TAG_REPORT_SUBMIT:
        pid = r.read_bytes()
        tok = _read_token(r, ReportToken)
        count = r.read_int()
        blinded = tuple(r.read_int() for _ in range(count))
        return ReportSubmit(
            pseudonym=pid,
            token=tok,
            blinded=blinded,
            ticks=r.read_ticks(),
            ciphertext=r.read_bytes(),
        )
    if tag == TAG_REPORT_GRANT:
        granted = r.read_int()
        count = r.read_int()
        return ReportGrant(granted=granted, sigs=tuple(r.read_int() for _ in range(count)))
    if tag == TAG_CREDIT_DEPOSIT:
        rid = r.read_bytes()
        tok = _read_token(r, CreditToken)
        return CreditDeposit(rid=rid, token=tok)
    if tag == TAG_DEPOSIT_RECEIPT:
        return DepositReceipt(balance=r.read_int())
    if tag == TAG_COMPLETE_TASK:
        return CompleteTask(task_index=r.read_int())
    if tag == TAG_EXPIRE_WINDOW:
        return ExpireWindow(window=r.read_int())
    if tag == TAG_OK:
        return Ok()
    if tag == TAG_ERROR:
        return ErrorResponse(code=r.read_bytes().decode(), detail=r.read_bytes().decode())
    raise MalformedMessage(f"unknown message tag 0x{tag:02x}")
