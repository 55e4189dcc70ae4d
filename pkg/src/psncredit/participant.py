"""Participant: earns credits pseudonymously, redeems them by name.

Three long-lived secrets drive everything the participant shows the
server.  r1 seeds request identifiers, r2 seeds credit preimages, r3 seeds
the blinding factors.  Task and report exchanges each run under a fresh
one-shot pseudonym; only identity registration and credit deposit carry
the real identity, and nothing in the deposited token ties back to the
pseudonymous exchanges except by breaking the blinding.

The participant verifies every signature it receives before trusting it,
so a misbehaving server is detected rather than absorbed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Protocol

from .encoding import encode_int
from .errors import (
    DuplicateTaskRequest,
    HorizonTooTight,
    InvalidSignature,
    MalformedMessage,
    NoSession,
    rejection_from_code,
)
from .crypto import (
    BlindingFactor,
    blind,
    derive_exponent,
    digest,
    encrypt_report,
    pbs_verify,
    rsa_verify,
    unblind,
    verify_ts,
)
from .messages import (
    CreditDeposit,
    DepositReceipt,
    ErrorResponse,
    IdentityGrant,
    IdentityRequest,
    Message,
    ReportGrant,
    ReportSubmit,
    TaskGrant,
    TaskRequest,
    TokenSignGrant,
    TokenSignRequest,
)
from .server import PublicParams
from .tokens import (
    KIND_REPORT,
    KIND_REQUEST,
    CreditToken,
    ReportToken,
    RequestToken,
    batch_identifier,
    credit_preimage,
    derive_blinding,
    new_pseudonym,
    request_identifier,
)

SECRET_BYTES = 32


class ServerLink(Protocol):
    """Whatever carries messages to the server: in-process, bus, or HTTP."""

    def send(self, msg: Message) -> Message: ...

    def params(self) -> PublicParams: ...

    def now(self) -> int: ...


@dataclass
class TaskSession:
    task_index: int
    query: bytes = b""
    report_ticks: int | None = None
    preimages: list[bytes] = field(default_factory=list)
    blindings: list[BlindingFactor] = field(default_factory=list)
    granted: int = 0


class Participant:
    def __init__(
        self,
        rid: bytes,
        link: ServerLink,
        secret_rng: random.Random,
        schedule_rng: random.Random | None = None,
    ):
        if not rid:
            raise ValueError("participant needs a non-empty identity")
        self.rid = rid
        self.link = link
        self.secret_rng = secret_rng
        self.schedule_rng = schedule_rng if schedule_rng is not None else secret_rng
        self.params = link.params()
        self.r1 = self._draw_secret()
        self.r2 = self._draw_secret()
        self.r3 = self._draw_secret()
        self.rid_sig: int | None = None
        self.sessions: dict[int, TaskSession] = {}
        self.wallet: list[CreditToken] = []
        self.wallet_peak = 0
        self.deposited = 0
        self.last_balance = 0

    def _draw_secret(self) -> bytes:
        return self.secret_rng.getrandbits(8 * SECRET_BYTES).to_bytes(SECRET_BYTES, "big")

    def _call(self, msg: Message, expect: type) -> Message:
        response = self.link.send(msg)
        if isinstance(response, ErrorResponse):
            raise rejection_from_code(response.code, response.detail)
        if not isinstance(response, expect):
            raise MalformedMessage(
                f"expected {expect.__name__}, got {type(response).__name__}"
            )
        return response

    # ---- identity ------------------------------------------------------------

    def ensure_identity(self) -> int:
        if self.rid_sig is None:
            grant = self._call(IdentityRequest(self.rid), IdentityGrant)
            if not rsa_verify(self.params.n, self.params.e, digest(self.rid), grant.rid_sig):
                raise InvalidSignature("identity signature from server does not verify")
            self.rid_sig = grant.rid_sig
        return self.rid_sig

    # ---- token acquisition -----------------------------------------------------

    def obtain_request_token(self, task_index: int) -> RequestToken:
        p = self.params
        tau = request_identifier(task_index, self.r1)
        e_a = derive_exponent(encode_int(task_index), p.request_exponent_bits)
        z = BlindingFactor.random(p.request_n, self.secret_rng)
        blinded = blind(tau, z, p.request_n, e_a)
        grant = self._call(
            TokenSignRequest(new_pseudonym(self.secret_rng), task_index, blinded, KIND_REQUEST),
            TokenSignGrant,
        )
        sig = unblind(grant.sig, z, p.request_n)
        if not pbs_verify(p.request_n, p.request_exponent_bits, encode_int(task_index), tau, sig):
            raise InvalidSignature("issued request token does not verify")
        return RequestToken(task_index=task_index, tau=tau, sig=sig)

    def obtain_report_token(self, task_index: int, batch_id: bytes) -> ReportToken:
        p = self.params
        e_a = derive_exponent(encode_int(task_index), p.report_exponent_bits)
        z = BlindingFactor.random(p.report_n, self.secret_rng)
        blinded = blind(batch_id, z, p.report_n, e_a)
        grant = self._call(
            TokenSignRequest(new_pseudonym(self.secret_rng), task_index, blinded, KIND_REPORT),
            TokenSignGrant,
        )
        sig = unblind(grant.sig, z, p.report_n)
        if not pbs_verify(p.report_n, p.report_exponent_bits, encode_int(task_index), batch_id, sig):
            raise InvalidSignature("issued report token does not verify")
        return ReportToken(task_index=task_index, batch_id=batch_id, sig=sig)

    # ---- protocol phases ---------------------------------------------------

    def request_task(self, task_index: int) -> TaskGrant:
        if task_index in self.sessions:
            raise DuplicateTaskRequest(f"already working task {task_index}")
        self.ensure_identity()
        token = self.obtain_request_token(task_index)
        grant = self._call(TaskRequest(new_pseudonym(self.secret_rng), token), TaskGrant)
        self.sessions[task_index] = TaskSession(task_index=task_index, query=grant.query)
        return grant

    def submit_report(self, task_index: int, payload: bytes | None = None) -> ReportGrant:
        session = self.sessions.get(task_index)
        if session is None:
            raise NoSession(f"no session for task {task_index}")
        p = self.params
        rid_sig = self.ensure_identity()
        if payload is None:
            payload = b"reading:" + session.query + encode_int(task_index)

        preimages = []
        blindings = []
        blinded = []
        for j in range(1, p.c_max + 1):
            m = credit_preimage(task_index, j, self.r2, rid_sig)
            z = derive_blinding(task_index, j, self.r3, p.n)
            preimages.append(m)
            blindings.append(z)
            blinded.append(blind(m, z, p.n, p.e))
        batch_id = batch_identifier(blinded, task_index, p.c_max)
        token = self.obtain_report_token(task_index, batch_id)

        ticks = self.link.now()
        ciphertext = encrypt_report(p.n, p.e, payload, self.secret_rng).to_bytes()
        grant = self._call(
            ReportSubmit(
                pseudonym=new_pseudonym(self.secret_rng),
                token=token,
                blinded=tuple(blinded),
                ticks=ticks,
                ciphertext=ciphertext,
            ),
            ReportGrant,
        )
        if not 0 <= grant.granted <= p.c_max or len(grant.sigs) != grant.granted:
            raise MalformedMessage("grant does not match its signature count")
        for j in range(grant.granted):
            sig = unblind(grant.sigs[j], blindings[j], p.n)
            if not verify_ts(p.n, p.e, preimages[j], ticks, sig):
                raise InvalidSignature(f"credit {j + 1} from server does not verify")
            self.wallet.append(CreditToken(preimage=preimages[j], ticks=ticks, sig=sig))
        self.wallet_peak = max(self.wallet_peak, len(self.wallet))
        session.report_ticks = ticks
        session.preimages = preimages
        session.blindings = blindings
        session.granted = grant.granted
        return grant

    def deposit_one(self) -> int:
        if not self.wallet:
            raise NoSession("wallet is empty")
        token = self.wallet.pop(0)
        receipt = self._call(CreditDeposit(self.rid, token), DepositReceipt)
        self.deposited += 1
        self.last_balance = receipt.balance
        return receipt.balance

    # ---- scheduling ------------------------------------------------------------

    def schedule_deposits(
        self, count: int, start: int, gap_min: int, gap_max: int, deadline: int
    ) -> list[int]:
        """Ticks for ``count`` deposits, strictly increasing, each gap drawn
        uniformly from [gap_min, gap_max], all strictly before ``deadline``.

        Later gaps shrink toward gap_min when the deadline looms; if even
        minimum gaps cannot fit, the schedule is infeasible.
        """
        if count < 0 or gap_min < 1 or gap_max < gap_min:
            raise ValueError("need count >= 0 and 1 <= gap_min <= gap_max")
        limit = deadline - 1
        if start + count * gap_min > limit:
            raise HorizonTooTight(
                f"{count} deposits with gaps >= {gap_min} from tick {start} "
                f"cannot finish before {deadline}"
            )
        ticks = []
        t = start
        for k in range(count):
            room = limit - t - (count - k - 1) * gap_min
            t += self.schedule_rng.randint(gap_min, min(gap_max, room))
            ticks.append(t)
        return ticks
