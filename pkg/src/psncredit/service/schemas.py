"""Request and response models for the HTTP service.

Byte fields travel as hex strings; big integers travel as JSON numbers
(arbitrary precision survives both pydantic and Python's json module).
The converters between wire models and protocol dataclasses live here so
the app and the client cannot drift apart.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

from ..messages import (
    CreditDeposit,
    DepositReceipt,
    IdentityGrant,
    ReportGrant,
    ReportSubmit,
    TaskGrant,
    TaskRequest,
    TokenSignGrant,
    TokenSignRequest,
)
from ..server import PublicParams
from ..tokens import CreditToken, ReportToken, RequestToken


class HexBytes(str):
    """Validated lowercase hex; empty string is allowed (empty bytes)."""

    @classmethod
    def check(cls, value: str) -> str:
        bytes.fromhex(value)
        return value.lower()


def _hex(data: bytes) -> str:
    return data.hex()


class ServerInit(BaseModel):
    key_bits: int = 256
    tasks_per_window: int = 1
    c_min: int = 1
    c_max: int = 10
    policy_c: int | None = None
    horizon: int = 1000
    report_slack: int = 0
    seed: int = 0
    exponent_bits: int | None = None


class ParamsOut(BaseModel):
    n: int
    e: int
    request_n: int
    request_exponent_bits: int
    report_n: int
    report_exponent_bits: int
    tasks_per_window: int
    c_min: int
    c_max: int
    horizon: int

    @classmethod
    def from_params(cls, p: PublicParams) -> "ParamsOut":
        return cls(**p.__dict__)

    def to_params(self) -> PublicParams:
        return PublicParams(**self.model_dump())


class ClockOut(BaseModel):
    tick: int


class AdvanceIn(BaseModel):
    ticks: int = Field(default=1, ge=0)


class IdentityIn(BaseModel):
    rid: str

    @field_validator("rid")
    @classmethod
    def _hexcheck(cls, v: str) -> str:
        return HexBytes.check(v)

    @classmethod
    def from_rid(cls, rid: bytes) -> "IdentityIn":
        return cls(rid=_hex(rid))


class IdentityOut(BaseModel):
    rid_sig: int

    @classmethod
    def from_grant(cls, g: IdentityGrant) -> "IdentityOut":
        return cls(rid_sig=g.rid_sig)

    def to_grant(self) -> IdentityGrant:
        return IdentityGrant(rid_sig=self.rid_sig)


class TokenSignIn(BaseModel):
    pseudonym: str
    task_index: int
    blinded: int
    kind: int

    @field_validator("pseudonym")
    @classmethod
    def _hexcheck(cls, v: str) -> str:
        return HexBytes.check(v)

    @classmethod
    def from_msg(cls, m: TokenSignRequest) -> "TokenSignIn":
        return cls(
            pseudonym=_hex(m.pseudonym),
            task_index=m.task_index,
            blinded=m.blinded,
            kind=m.kind,
        )

    def to_msg(self) -> TokenSignRequest:
        return TokenSignRequest(
            pseudonym=bytes.fromhex(self.pseudonym),
            task_index=self.task_index,
            blinded=self.blinded,
            kind=self.kind,
        )


class TokenSignOut(BaseModel):
    sig: int

    @classmethod
    def from_grant(cls, g: TokenSignGrant) -> "TokenSignOut":
        return cls(sig=g.sig)

    def to_grant(self) -> TokenSignGrant:
        return TokenSignGrant(sig=self.sig)


class TaskRequestIn(BaseModel):
    pseudonym: str
    task_index: int
    tau: str
    sig: int

    @field_validator("pseudonym", "tau")
    @classmethod
    def _hexcheck(cls, v: str) -> str:
        return HexBytes.check(v)

    @classmethod
    def from_msg(cls, m: TaskRequest) -> "TaskRequestIn":
        return cls(
            pseudonym=_hex(m.pseudonym),
            task_index=m.token.task_index,
            tau=_hex(m.token.tau),
            sig=m.token.sig,
        )

    def to_msg(self) -> TaskRequest:
        return TaskRequest(
            pseudonym=bytes.fromhex(self.pseudonym),
            token=RequestToken(
                task_index=self.task_index,
                tau=bytes.fromhex(self.tau),
                sig=self.sig,
            ),
        )


class TaskGrantOut(BaseModel):
    task_index: int
    c_max: int
    query: str

    @classmethod
    def from_grant(cls, g: TaskGrant) -> "TaskGrantOut":
        return cls(task_index=g.task_index, c_max=g.c_max, query=_hex(g.query))

    def to_grant(self) -> TaskGrant:
        return TaskGrant(
            task_index=self.task_index, c_max=self.c_max, query=bytes.fromhex(self.query)
        )


class ReportIn(BaseModel):
    pseudonym: str
    task_index: int
    batch_id: str
    sig: int
    blinded: list[int]
    ticks: int
    ciphertext: str

    @field_validator("pseudonym", "batch_id", "ciphertext")
    @classmethod
    def _hexcheck(cls, v: str) -> str:
        return HexBytes.check(v)

    @classmethod
    def from_msg(cls, m: ReportSubmit) -> "ReportIn":
        return cls(
            pseudonym=_hex(m.pseudonym),
            task_index=m.token.task_index,
            batch_id=_hex(m.token.batch_id),
            sig=m.token.sig,
            blinded=list(m.blinded),
            ticks=m.ticks,
            ciphertext=_hex(m.ciphertext),
        )

    def to_msg(self) -> ReportSubmit:
        return ReportSubmit(
            pseudonym=bytes.fromhex(self.pseudonym),
            token=ReportToken(
                task_index=self.task_index,
                batch_id=bytes.fromhex(self.batch_id),
                sig=self.sig,
            ),
            blinded=tuple(self.blinded),
            ticks=self.ticks,
            ciphertext=bytes.fromhex(self.ciphertext),
        )


class ReportOut(BaseModel):
    granted: int
    sigs: list[int]

    @classmethod
    def from_grant(cls, g: ReportGrant) -> "ReportOut":
        return cls(granted=g.granted, sigs=list(g.sigs))

    def to_grant(self) -> ReportGrant:
        return ReportGrant(granted=self.granted, sigs=tuple(self.sigs))


class DepositIn(BaseModel):
    rid: str
    preimage: str
    ticks: int
    sig: int

    @field_validator("rid", "preimage")
    @classmethod
    def _hexcheck(cls, v: str) -> str:
        return HexBytes.check(v)

    @classmethod
    def from_msg(cls, m: CreditDeposit) -> "DepositIn":
        return cls(
            rid=_hex(m.rid),
            preimage=_hex(m.token.preimage),
            ticks=m.token.ticks,
            sig=m.token.sig,
        )

    def to_msg(self) -> CreditDeposit:
        return CreditDeposit(
            rid=bytes.fromhex(self.rid),
            token=CreditToken(
                preimage=bytes.fromhex(self.preimage), ticks=self.ticks, sig=self.sig
            ),
        )


class DepositOut(BaseModel):
    balance: int

    @classmethod
    def from_receipt(cls, r: DepositReceipt) -> "DepositOut":
        return cls(balance=r.balance)

    def to_receipt(self) -> DepositReceipt:
        return DepositReceipt(balance=self.balance)


class TaskIndexIn(BaseModel):
    task_index: int


class WindowIn(BaseModel):
    window: int


class ErrorOut(BaseModel):
    code: str
    detail: str = ""


class RunIn(BaseModel):
    scenario: dict = Field(default_factory=dict)
    seed: int | None = None


class SuiteIn(BaseModel):
    seed: int = 0
    key_bits: int = 256


class BenchIn(BaseModel):
    tasks: list[int]
    c: int = 5
    key_bits: int = 256
    repeat: int = 100


class StorageIn(BaseModel):
    M: int = Field(ge=1)
    cmax: int = Field(ge=1)
    key_bits: int = 128
    seed: int = 0
