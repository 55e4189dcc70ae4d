"""Adversary drivers woven into simulation runs.

Each driver gets called at fixed points of the honest flow and mounts its
attempts through the same logged links honest traffic uses, so adversarial
messages are part of the transcript and byte accounting.  A driver records
what it expected the server to answer and what actually came back; the
analysis layer turns that into pass/fail judgments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..errors import (
    DoubleDeposit,
    ExpiredTimestamp,
    IdentityMismatch,
    InvalidSignature,
    ReusedReportToken,
    ReusedRequestToken,
)
from ..messages import (
    TAG_REPORT_SUBMIT,
    TAG_TASK_REQUEST,
    CreditDeposit,
    ErrorResponse,
    IdentityGrant,
    IdentityRequest,
)
from ..participant import Participant
from ..tokens import CreditToken, credit_preimage
from .bus import LocalLink, TrafficLog


@dataclass
class Attempt:
    strategy: str
    expected_code: str
    got_code: str
    accepted: bool

    @property
    def as_expected(self) -> bool:
        return not self.accepted and self.got_code == self.expected_code


@dataclass
class AttackDriver:
    name = "none"
    attempts: list[Attempt] = field(default_factory=list)

    def on_report_done(self, participant: Participant, task_index: int) -> None:
        pass

    def on_deposit_done(self, participant: Participant, token: CreditToken) -> None:
        pass

    def on_window_expired(self) -> None:
        pass

    def _note(self, strategy: str, expected_code: str, response) -> None:
        if isinstance(response, ErrorResponse):
            self.attempts.append(Attempt(strategy, expected_code, response.code, accepted=False))
        else:
            self.attempts.append(Attempt(strategy, expected_code, "", accepted=True))

    def results(self) -> dict | None:
        if not self.attempts:
            return None
        return {
            "attack": self.name,
            "attempts": len(self.attempts),
            "accepted": sum(a.accepted for a in self.attempts),
            "all_rejected": all(not a.accepted for a in self.attempts),
            "all_as_expected": all(a.as_expected for a in self.attempts),
            "outcomes": [
                {
                    "strategy": a.strategy,
                    "expected": a.expected_code,
                    "got": a.got_code,
                    "as_expected": a.as_expected,
                }
                for a in self.attempts
            ],
        }


class ReplayDriver(AttackDriver):
    """Participant 0 replays its own already-spent material verbatim:
    the task request, the report submission, each deposited credit, and
    one credit again after the window closed."""

    name = "replay"

    def __init__(self, link: LocalLink, log: TrafficLog, adversary_label: str):
        super().__init__()
        self.link = link
        self.log = log
        self.adversary_label = adversary_label
        self.stashed: bytes | None = None

    def _last_payload(self, tag: int) -> bytes | None:
        for env in reversed(self.log.envelopes):
            if env.sender == self.adversary_label and env.payload and env.payload[0] == tag:
                return env.payload
        return None

    def on_report_done(self, participant: Participant, task_index: int) -> None:
        if participant.rid.decode(errors="replace") != self.adversary_label:
            return
        request_payload = self._last_payload(TAG_TASK_REQUEST)
        if request_payload is not None:
            self._note(
                "replay-task-request",
                ReusedRequestToken.code,
                self.link.send_bytes(request_payload),
            )
        report_payload = self._last_payload(TAG_REPORT_SUBMIT)
        if report_payload is not None:
            self._note(
                "replay-report",
                ReusedReportToken.code,
                self.link.send_bytes(report_payload),
            )

    def on_deposit_done(self, participant: Participant, token: CreditToken) -> None:
        if participant.rid.decode(errors="replace") != self.adversary_label:
            return
        deposit = CreditDeposit(participant.rid, token)
        self._note("replay-deposit", DoubleDeposit.code, self.link.send(deposit))
        if self.stashed is None:
            self.stashed = deposit.to_bytes()

    def on_window_expired(self) -> None:
        if self.stashed is not None:
            self._note(
                "replay-deposit-after-expiry",
                ExpiredTimestamp.code,
                self.link.send_bytes(self.stashed),
            )


class TheftDriver(AttackDriver):
    """A registered outsider lifts credit tokens out of victims' wallets
    and tries to deposit them into its own account."""

    name = "theft"
    rid = b"thief"

    def __init__(self, link: LocalLink):
        super().__init__()
        self.link = link

    def on_report_done(self, participant: Participant, task_index: int) -> None:
        if not participant.wallet:
            return
        stolen = participant.wallet[0]
        self._note(
            "deposit-stolen-credit",
            IdentityMismatch.code,
            self.link.send(CreditDeposit(self.rid, stolen)),
        )


class ForgeryDriver(AttackDriver):
    """A registered outsider fabricates credit tokens without ever being
    granted one: fresh preimages with guessed signatures, observed
    signatures glued to its own preimages, and algebraically mangled
    observed signatures."""

    name = "forgery"
    rid = b"forger"

    def __init__(self, link: LocalLink, rng: random.Random, max_attempts: int = 60):
        super().__init__()
        self.link = link
        self.rng = rng
        self.max_attempts = max_attempts
        self.rid_sig: int | None = None
        self.r2 = rng.getrandbits(256).to_bytes(32, "big")
        self.counter = 0

    def _ensure_identity(self) -> int:
        if self.rid_sig is None:
            grant = self.link.send(IdentityRequest(self.rid))
            assert isinstance(grant, IdentityGrant)
            self.rid_sig = grant.rid_sig
        return self.rid_sig

    def on_deposit_done(self, participant: Participant, token: CreditToken) -> None:
        if len(self.attempts) >= self.max_attempts:
            return
        rid_sig = self._ensure_identity()
        n = self.link.params().n
        self.counter += 1
        own_preimage = credit_preimage(1, self.counter, self.r2, rid_sig)

        guessed = CreditToken(own_preimage, token.ticks, self.rng.randrange(1, n))
        self._note(
            "guessed-signature",
            InvalidSignature.code,
            self.link.send(CreditDeposit(self.rid, guessed)),
        )
        swapped = CreditToken(own_preimage, token.ticks, token.sig)
        self._note(
            "observed-signature-on-own-preimage",
            InvalidSignature.code,
            self.link.send(CreditDeposit(self.rid, swapped)),
        )
        reflected = CreditToken(token.preimage, token.ticks, n - token.sig)
        self._note(
            "reflected-observed-signature",
            InvalidSignature.code,
            self.link.send(CreditDeposit(self.rid, reflected)),
        )


def make_driver(
    attack: str | None,
    server,
    log: TrafficLog,
    rng: random.Random,
    adversary_label: str,
) -> AttackDriver:
    if attack in (None, "linkage"):
        # linkage is analyzed after the fact on honest transcripts
        return AttackDriver()
    if attack == "replay":
        return ReplayDriver(LocalLink(server, sender="adv-replay", log=log), log, adversary_label)
    if attack == "theft":
        return TheftDriver(LocalLink(server, sender="adv-theft", log=log))
    if attack == "forgery":
        return ForgeryDriver(LocalLink(server, sender="adv-forgery", log=log), rng)
    raise ValueError(f"no driver for attack {attack!r}")
