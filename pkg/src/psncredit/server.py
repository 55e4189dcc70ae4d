"""Sensing server: token issuance, spend ledgers, credit accounts.

The server never links a pseudonymous exchange to an account.  What it
does enforce, in this order inside every handler, is recorded-then-checked:
each request is appended to the transcript first (rejected attempts are
part of what an observer saw), then validated, and state changes happen
only after every check passed.

Double-spend state is three ledgers; entries for a task are released when
the task completes, and credit entries for a time window are released when
the window expires.  Expiry also closes the window for deposits, so a
released credit entry cannot be replayed: its timestamp now falls in a
closed window.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .clock import SimClock
from .encoding import encode_int
from .errors import (
    BatchMismatch,
    DoubleDeposit,
    ExpiredTimestamp,
    FramingError,
    IdentityMismatch,
    InvalidSignature,
    MalformedMessage,
    MalformedRequest,
    Rejection,
    ReusedReportToken,
    ReusedRequestToken,
    StaleTimestamp,
    TaskClosed,
    UnknownTask,
    WindowNotFinished,
    WindowStillOpen,
)
from .crypto import (
    PbsKeyPair,
    ReportCiphertext,
    RsaKeyPair,
    blind_sign_ts,
    decrypt_report,
    digest,
    keygen_pbs,
    keygen_rsa,
    pbs_sign,
    pbs_verify,
    rsa_sign,
    rsa_verify,
    verify_ts,
)
from .crypto.keys import DEFAULT_EXPONENT_BITS
from .messages import (
    CompleteTask,
    CreditDeposit,
    DepositReceipt,
    ErrorResponse,
    ExpireWindow,
    IdentityGrant,
    IdentityRequest,
    Message,
    Ok,
    ReportGrant,
    ReportSubmit,
    TaskGrant,
    TaskRequest,
    TokenSignGrant,
    TokenSignRequest,
    message_from_bytes,
)
from .tokens import (
    KIND_REPORT,
    KIND_REQUEST,
    CreditToken,
    ReportToken,
    RequestToken,
    batch_identifier,
    parse_credit_preimage,
)

QUERY_BYTES = 16


@dataclass(frozen=True)
class ServerConfig:
    tasks_per_window: int = 1
    c_min: int = 1
    c_max: int = 10
    policy_c: int | None = None
    horizon: int = 1000
    report_slack: int = 0
    # negative-control hooks: disable one defense to show it is load-bearing
    disable_credit_ledger: bool = False
    disable_identity_binding: bool = False

    def __post_init__(self):
        if self.tasks_per_window < 1:
            raise ValueError("need at least one task per window")
        if not 1 <= self.c_min <= self.c_max:
            raise ValueError("need 1 <= c_min <= c_max")
        if self.horizon < 1:
            raise ValueError("window horizon must be positive")
        if self.report_slack < 0:
            raise ValueError("report slack cannot be negative")

    def granted_credits(self) -> int:
        """Credits granted per accepted report under the current policy."""
        if self.policy_c is None:
            return self.c_max
        return max(self.c_min, min(self.policy_c, self.c_max))


@dataclass(frozen=True)
class PublicParams:
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


@dataclass(frozen=True)
class TranscriptEntry:
    tick: int
    phase: str
    actor: bytes
    payload: bytes


@dataclass
class TokenLedger:
    """Spent-token sets keyed by task or window, with peak tracking."""

    _sets: dict[int, set[bytes]] = field(default_factory=dict)
    size: int = 0
    peak: int = 0

    def seen(self, key: int, item: bytes) -> bool:
        return item in self._sets.get(key, ())

    def add(self, key: int, item: bytes) -> bool:
        bucket = self._sets.setdefault(key, set())
        if item in bucket:
            return False
        bucket.add(item)
        self.size += 1
        self.peak = max(self.peak, self.size)
        return True

    def release(self, key: int) -> int:
        dropped = len(self._sets.pop(key, ()))
        self.size -= dropped
        return dropped


@dataclass(frozen=True)
class StorageMetrics:
    request_entries: int
    report_entries: int
    credit_entries: int
    peak_request: int
    peak_report: int
    peak_credit: int
    peak_total: int
    bound: int
    baseline: int


def storage_bound(tasks_per_window: int, c_max: int) -> int:
    """Ledger entries at the peak for one participant working a full
    window: one request and one report identifier per task plus up to
    c_max credits per task."""
    return tasks_per_window * (c_max + 2)


def storage_baseline(tasks_per_window: int, c_max: int) -> int:
    """What a server without released ledgers would hold for the same
    workload: both blinded batches and granted credits stay forever,
    plus the request identifier."""
    return tasks_per_window * (2 * c_max + 1)


class SensingServer:
    def __init__(
        self,
        config: ServerConfig,
        rsa_key: RsaKeyPair,
        request_key: PbsKeyPair,
        report_key: PbsKeyPair,
        clock: SimClock | None = None,
    ):
        self.config = config
        self.rsa = rsa_key
        self.request_key = request_key
        self.report_key = report_key
        self.clock = clock if clock is not None else SimClock()
        self.request_ledger = TokenLedger()
        self.report_ledger = TokenLedger()
        self.credit_ledger = TokenLedger()
        self.accounts: dict[bytes, int] = {}
        self.transcript: list[TranscriptEntry] = []
        self.completed_tasks: set[int] = set()
        self.expired_windows: set[int] = set()
        self.reports_received: dict[int, int] = {}
        self.credits_granted = 0
        self.peak_total = 0

    @classmethod
    def generate(
        cls,
        config: ServerConfig,
        key_bits: int,
        rng: random.Random,
        exponent_bits: int = DEFAULT_EXPONENT_BITS,
        clock: SimClock | None = None,
    ) -> "SensingServer":
        rsa_key = keygen_rsa(key_bits, rng)
        request_key = keygen_pbs(key_bits, rng, exponent_bits=exponent_bits)
        report_key = keygen_pbs(key_bits, rng, exponent_bits=exponent_bits)
        return cls(config, rsa_key, request_key, report_key, clock=clock)

    # ---- structure helpers -------------------------------------------------

    def window_of_task(self, task_index: int) -> int:
        return (task_index - 1) // self.config.tasks_per_window

    def window_of_ticks(self, ticks: int) -> int:
        return ticks // self.config.horizon

    def window_tasks(self, window: int) -> range:
        m = self.config.tasks_per_window
        return range(window * m + 1, (window + 1) * m + 1)

    def task_query(self, task_index: int) -> bytes:
        return digest(b"sensing-query" + encode_int(task_index))[:QUERY_BYTES]

    def public_params(self) -> PublicParams:
        return PublicParams(
            n=self.rsa.n,
            e=self.rsa.e,
            request_n=self.request_key.n,
            request_exponent_bits=self.request_key.exponent_bits,
            report_n=self.report_key.n,
            report_exponent_bits=self.report_key.exponent_bits,
            tasks_per_window=self.config.tasks_per_window,
            c_min=self.config.c_min,
            c_max=self.config.c_max,
            horizon=self.config.horizon,
        )

    def balance(self, rid: bytes) -> int:
        return self.accounts.get(rid, 0)

    def _record(self, phase: str, actor: bytes, payload: bytes) -> None:
        self.transcript.append(
            TranscriptEntry(tick=self.clock.now, phase=phase, actor=actor, payload=payload)
        )

    def _note_storage(self) -> None:
        total = self.request_ledger.size + self.report_ledger.size + self.credit_ledger.size
        self.peak_total = max(self.peak_total, total)

    def _check_task_open(self, task_index: int) -> None:
        if task_index < 1:
            raise UnknownTask(f"no task {task_index}")
        if task_index in self.completed_tasks:
            raise TaskClosed(f"task {task_index} already completed")
        if self.window_of_task(task_index) in self.expired_windows:
            raise TaskClosed(f"window of task {task_index} has expired")

    # ---- handlers ----------------------------------------------------------

    def handle_identity(self, rid: bytes) -> IdentityGrant:
        self._record("identity", rid, IdentityRequest(rid).to_bytes())
        if not rid:
            raise MalformedRequest("empty identity")
        return IdentityGrant(rid_sig=rsa_sign(self.rsa, digest(rid)))

    def handle_token_sign(
        self, pseudonym: bytes, task_index: int, blinded: int, kind: int
    ) -> TokenSignGrant:
        self._record(
            "token-sign",
            pseudonym,
            TokenSignRequest(pseudonym, task_index, blinded, kind).to_bytes(),
        )
        if task_index < 1:
            raise UnknownTask(f"no task {task_index}")
        if kind == KIND_REQUEST:
            key = self.request_key
        elif kind == KIND_REPORT:
            key = self.report_key
        else:
            raise MalformedRequest(f"cannot issue token kind 0x{kind:02x}")
        if not 0 < blinded < key.n:
            raise MalformedRequest("blinded value out of range")
        return TokenSignGrant(sig=pbs_sign(key, encode_int(task_index), blinded))

    def handle_task_request(self, pseudonym: bytes, token: RequestToken) -> TaskGrant:
        self._record("task-request", pseudonym, TaskRequest(pseudonym, token).to_bytes())
        i = token.task_index
        self._check_task_open(i)
        if not pbs_verify(
            self.request_key.n,
            self.request_key.exponent_bits,
            encode_int(i),
            token.tau,
            token.sig,
        ):
            raise InvalidSignature("request token signature does not verify")
        if not self.request_ledger.add(i, token.tau):
            raise ReusedRequestToken(f"request token already spent on task {i}")
        self._note_storage()
        return TaskGrant(task_index=i, c_max=self.config.c_max, query=self.task_query(i))

    def handle_report(
        self,
        pseudonym: bytes,
        token: ReportToken,
        blinded: list[int],
        ticks: int,
        ciphertext: bytes,
    ) -> ReportGrant:
        self._record(
            "report",
            pseudonym,
            ReportSubmit(pseudonym, token, tuple(blinded), ticks, ciphertext).to_bytes(),
        )
        i = token.task_index
        cfg = self.config
        self._check_task_open(i)
        if len(blinded) != cfg.c_max:
            raise BatchMismatch(f"expected {cfg.c_max} blinded preimages, got {len(blinded)}")
        if any(not 0 < mu < self.rsa.n for mu in blinded):
            raise BatchMismatch("blinded preimage out of range")
        if batch_identifier(list(blinded), i, cfg.c_max) != token.batch_id:
            raise BatchMismatch("token does not commit to this batch")
        if not pbs_verify(
            self.report_key.n,
            self.report_key.exponent_bits,
            encode_int(i),
            token.batch_id,
            token.sig,
        ):
            raise InvalidSignature("report token signature does not verify")
        # reuse before freshness: a verbatim replay is reported as reuse
        # even when its timestamp also went stale
        if self.report_ledger.seen(i, token.batch_id):
            raise ReusedReportToken(f"report token already spent on task {i}")
        now = self.clock.now
        if not now - cfg.report_slack <= ticks <= now:
            raise StaleTimestamp(f"stamp {ticks} outside [{now - cfg.report_slack}, {now}]")
        try:
            plaintext = decrypt_report(self.rsa, ReportCiphertext.from_bytes(ciphertext))
        except FramingError as exc:
            raise MalformedRequest(f"report ciphertext framing: {exc}") from exc
        del plaintext  # report content is out of scope; receipt is what matters
        self.report_ledger.add(i, token.batch_id)
        self._note_storage()
        self.reports_received[i] = self.reports_received.get(i, 0) + 1
        c = cfg.granted_credits()
        sigs = tuple(blind_sign_ts(self.rsa, mu, ticks) for mu in blinded[:c])
        self.credits_granted += c
        return ReportGrant(granted=c, sigs=sigs)

    def handle_deposit(self, rid: bytes, token: CreditToken) -> DepositReceipt:
        self._record("deposit", rid, CreditDeposit(rid, token).to_bytes())
        if not rid:
            raise MalformedRequest("empty identity")
        window = self.window_of_ticks(token.ticks)
        if window in self.expired_windows:
            raise ExpiredTimestamp(f"window {window} is closed for deposits")
        if not verify_ts(self.rsa.n, self.rsa.e, token.preimage, token.ticks, token.sig):
            raise InvalidSignature("credit signature does not verify")
        _, rid_sig = parse_credit_preimage(token.preimage)
        if not self.config.disable_identity_binding:
            if not rsa_verify(self.rsa.n, self.rsa.e, digest(rid), rid_sig):
                raise IdentityMismatch("credit is bound to a different identity")
        entry = digest(token.preimage)
        if self.credit_ledger.seen(window, entry):
            raise DoubleDeposit("credit already deposited this window")
        if not self.config.disable_credit_ledger:
            self.credit_ledger.add(window, entry)
            self._note_storage()
        balance = self.accounts.get(rid, 0) + 1
        self.accounts[rid] = balance
        return DepositReceipt(balance=balance)

    # ---- operator actions --------------------------------------------------

    def complete_task(self, task_index: int) -> Ok:
        # negative indices cannot even be framed, so reject before recording
        if task_index < 0:
            raise UnknownTask(f"no task {task_index}")
        self._record("complete-task", b"", CompleteTask(task_index).to_bytes())
        if task_index < 1:
            raise UnknownTask(f"no task {task_index}")
        if task_index in self.completed_tasks:
            raise TaskClosed(f"task {task_index} already completed")
        self.completed_tasks.add(task_index)
        self.request_ledger.release(task_index)
        self.report_ledger.release(task_index)
        return Ok()

    def expire_window(self, window: int) -> Ok:
        # negative indices cannot even be framed, so reject before recording
        if window < 0:
            raise MalformedRequest(f"no window {window}")
        self._record("expire-window", b"", ExpireWindow(window).to_bytes())
        if window in self.expired_windows:
            raise MalformedRequest(f"window {window} already expired")
        end = (window + 1) * self.config.horizon
        if self.clock.now < end:
            raise WindowStillOpen(f"window {window} runs until tick {end}")
        open_tasks = [i for i in self.window_tasks(window) if i not in self.completed_tasks]
        if open_tasks:
            raise WindowNotFinished(f"tasks {open_tasks} still open in window {window}")
        self.expired_windows.add(window)
        self.credit_ledger.release(window)
        return Ok()

    # ---- reporting ---------------------------------------------------------

    def storage_metrics(self) -> StorageMetrics:
        cfg = self.config
        return StorageMetrics(
            request_entries=self.request_ledger.size,
            report_entries=self.report_ledger.size,
            credit_entries=self.credit_ledger.size,
            peak_request=self.request_ledger.peak,
            peak_report=self.report_ledger.peak,
            peak_credit=self.credit_ledger.peak,
            peak_total=self.peak_total,
            bound=storage_bound(cfg.tasks_per_window, cfg.c_max),
            baseline=storage_baseline(cfg.tasks_per_window, cfg.c_max),
        )

    # ---- transport entry points ---------------------------------------------

    def dispatch(self, msg: Message) -> Message:
        try:
            if isinstance(msg, IdentityRequest):
                return self.handle_identity(msg.rid)
            if isinstance(msg, TokenSignRequest):
                return self.handle_token_sign(msg.pseudonym, msg.task_index, msg.blinded, msg.kind)
            if isinstance(msg, TaskRequest):
                return self.handle_task_request(msg.pseudonym, msg.token)
            if isinstance(msg, ReportSubmit):
                return self.handle_report(
                    msg.pseudonym, msg.token, list(msg.blinded), msg.ticks, msg.ciphertext
                )
            if isinstance(msg, CreditDeposit):
                return self.handle_deposit(msg.rid, msg.token)
            if isinstance(msg, CompleteTask):
                return self.complete_task(msg.task_index)
            if isinstance(msg, ExpireWindow):
                return self.expire_window(msg.window)
            raise MalformedRequest(f"server cannot handle {type(msg).__name__}")
        except Rejection as exc:
            return ErrorResponse(code=exc.code, detail=str(exc))
        except FramingError as exc:
            return ErrorResponse(code=MalformedRequest.code, detail=str(exc))

    def dispatch_bytes(self, raw: bytes) -> bytes:
        try:
            msg = message_from_bytes(raw)
        except MalformedMessage as exc:
            return ErrorResponse(code=MalformedRequest.code, detail=str(exc)).to_bytes()
        return self.dispatch(msg).to_bytes()
