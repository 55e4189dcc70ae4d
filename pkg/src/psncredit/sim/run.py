"""Deterministic simulation runs.

One run wires seeded participants to a seeded server over logged links and
plays out every task chain as discrete events on a tick heap: request the
task, report, deposit each earned credit at scheduled ticks, move to the
next task.  Tasks complete when every participant has reported; the window
expires once all chains have drained.  Conservation and privacy invariants
are checked as the run progresses, and the whole exchange reduces to a
transcript hash that depends only on (scenario, seed).
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import random
from dataclasses import asdict, dataclass, field

from ..clock import SimClock
from ..participant import Participant
from ..server import SensingServer, ServerConfig, StorageMetrics
from ..messages import (
    TAG_CREDIT_DEPOSIT,
    TAG_REPORT_SUBMIT,
    TAG_TASK_REQUEST,
    TAG_TOKEN_SIGN_REQUEST,
    message_from_bytes,
)
from .attacks import AttackDriver, make_driver
from .bus import LocalLink, TrafficLog
from .scenario import Scenario

# below this many safe bits per factor the derived-exponent guarantee
# needs the smaller toy exponent size
_SMALL_KEY_CUTOFF = 70
_TOY_EXPONENT_BITS = 16
_PSEUDONYMOUS_TAGS = (TAG_TOKEN_SIGN_REQUEST, TAG_TASK_REQUEST, TAG_REPORT_SUBMIT)


@dataclass
class TranscriptBundle:
    scenario: Scenario
    seed: int
    final_tick: int
    transcript_hash: str
    lines: list[str]
    balances: dict[str, int]
    granted: dict[str, int]
    wallet_peaks: dict[str, int]
    deposited: dict[str, int]
    storage: StorageMetrics
    comm: dict[str, int]
    violations: list[str]
    attack_results: dict | None
    # live objects for post-hoc analysis; excluded from summary()
    server: SensingServer = field(repr=False)
    participants: list[Participant] = field(repr=False)
    log: TrafficLog = field(repr=False)

    def structure(self) -> list[tuple[int, str, int]]:
        """Shape of the exchange with all cryptographic content removed:
        who talked when, and what kind of message it was."""
        return [(e.tick, e.sender, e.payload[0]) for e in self.log.envelopes]

    def summary(self) -> dict:
        return {
            "scenario": self.scenario.to_mapping(),
            "seed": self.seed,
            "final_tick": self.final_tick,
            "transcript_hash": self.transcript_hash,
            "messages": self.log.message_count,
            "balances": self.balances,
            "granted": self.granted,
            "wallet_peaks": self.wallet_peaks,
            "deposited": self.deposited,
            "storage": asdict(self.storage),
            "comm": self.comm,
            "violations": self.violations,
            "attack_results": self.attack_results,
        }


def exponent_bits_for(key_bits: int) -> int:
    from ..crypto.keys import DEFAULT_EXPONENT_BITS

    return DEFAULT_EXPONENT_BITS if key_bits >= _SMALL_KEY_CUTOFF else _TOY_EXPONENT_BITS


def pseudonyms_of(log: TrafficLog) -> list[bytes]:
    """Pseudonyms across distinct payloads.  Verbatim replays are the same
    payload and do not count twice; a fresh message reusing a pseudonym
    does."""
    pids = []
    seen: set[bytes] = set()
    for env in log.envelopes:
        if not env.payload or env.payload in seen:
            continue
        seen.add(env.payload)
        if env.payload[0] in _PSEUDONYMOUS_TAGS:
            pids.append(message_from_bytes(env.payload).pseudonym)
    return pids


def check_privacy(participants: list[Participant], log: TrafficLog) -> list[str]:
    violations = []
    pids = pseudonyms_of(log)
    if len(pids) != len(set(pids)):
        violations.append("pseudonym reused across exchanges")
    everything = b"\x00".join(
        itertools.chain(
            (e.payload for e in log.envelopes), (e.response for e in log.envelopes)
        )
    )
    pre_deposit = b"\x00".join(
        itertools.chain(
            (e.payload for e in log.envelopes if e.payload[:1] != bytes([TAG_CREDIT_DEPOSIT])),
            (e.response for e in log.envelopes),
        )
    )
    for idx, p in enumerate(participants):
        for name, secret in (("r1", p.r1), ("r2", p.r2), ("r3", p.r3)):
            if secret in everything:
                violations.append(f"secret {name} of participant {idx} leaked to the wire")
        for session in p.sessions.values():
            for m in session.preimages:
                if m in pre_deposit:
                    violations.append(
                        f"credit preimage of participant {idx} task {session.task_index} "
                        "visible before deposit"
                    )
    return violations


def run(scenario: Scenario, seed: int | None = None, secret_perm: list[int] | None = None) -> TranscriptBundle:
    """Execute one scenario.  ``secret_perm`` reassigns the participants'
    secret seeds (schedules stay put); the linkage analysis uses it to
    compare runs that differ only in who holds which secrets."""
    if seed is None:
        seed = scenario.seed if scenario.seed is not None else 0
    master = random.Random(seed)
    keygen_rng = random.Random(master.getrandbits(64))
    n = scenario.n_participants
    secret_seeds = [master.getrandbits(64) for _ in range(n)]
    schedule_seeds = [master.getrandbits(64) for _ in range(n)]
    attack_rng = random.Random(master.getrandbits(64))
    if secret_perm is not None:
        if sorted(secret_perm) != list(range(n)):
            raise ValueError("secret_perm must permute range(n_participants)")
        secret_seeds = [secret_seeds[j] for j in secret_perm]

    horizon = scenario.resolved_horizon()
    clock = SimClock()
    config = ServerConfig(
        tasks_per_window=scenario.M,
        c_min=scenario.c_min,
        c_max=scenario.c_max,
        policy_c=scenario.policy_c,
        horizon=horizon,
    )
    server = SensingServer.generate(
        config,
        scenario.key_bits,
        keygen_rng,
        exponent_bits=exponent_bits_for(scenario.key_bits),
        clock=clock,
    )
    log = TrafficLog()
    labels = [f"sp{i}" for i in range(n)]
    participants = [
        Participant(
            rid=labels[i].encode(),
            link=LocalLink(server, sender=labels[i], log=log),
            secret_rng=random.Random(secret_seeds[i]),
            schedule_rng=random.Random(schedule_seeds[i]),
        )
        for i in range(n)
    ]
    driver: AttackDriver = make_driver(scenario.attack, server, log, attack_rng, labels[0])

    granted: dict[str, int] = {lab: 0 for lab in labels}
    reports_done: dict[int, int] = {}
    violations: list[str] = []
    heap: list[tuple[int, int, tuple]] = []
    seq = itertools.count()

    def push(tick: int, action: tuple) -> None:
        heapq.heappush(heap, (tick, next(seq), action))

    def check_conservation(tick: int) -> None:
        total = sum(server.accounts.values())
        if total > server.credits_granted:
            violations.append(
                f"tick {tick}: account total {total} exceeds {server.credits_granted} granted"
            )
        for i, p in enumerate(participants):
            if p.deposited + len(p.wallet) != granted[labels[i]]:
                violations.append(
                    f"tick {tick}: participant {i} wallet+deposits do not add up to grants"
                )

    for i in range(n):
        push(i, ("request", i, 1))

    while heap:
        tick, _, action = heapq.heappop(heap)
        clock.advance_to(tick)
        kind = action[0]
        if kind == "request":
            _, idx, task = action
            participants[idx].request_task(task)
            push(tick + 1, ("report", idx, task))
        elif kind == "report":
            _, idx, task = action
            p = participants[idx]
            grant = p.submit_report(task)
            granted[labels[idx]] += grant.granted
            driver.on_report_done(p, task)
            reports_done[task] = reports_done.get(task, 0) + 1
            if reports_done[task] == n:
                server.complete_task(task)
            deposit_ticks = p.schedule_deposits(
                grant.granted,
                start=tick,
                gap_min=scenario.gap_min,
                gap_max=scenario.gap_max,
                deadline=horizon,
            )
            for dt in deposit_ticks:
                push(dt, ("deposit", idx))
            if task < scenario.M:
                next_start = deposit_ticks[-1] + 1 if deposit_ticks else tick + 1
                push(next_start, ("request", idx, task + 1))
        elif kind == "deposit":
            _, idx = action
            p = participants[idx]
            token = p.wallet[0]
            p.deposit_one()
            driver.on_deposit_done(p, token)
        check_conservation(tick)

    clock.advance_to(horizon)
    server.expire_window(0)
    driver.on_window_expired()
    check_conservation(horizon)

    expected = scenario.M * config.granted_credits()
    for i, p in enumerate(participants):
        balance = server.balance(p.rid)
        if balance != expected:
            violations.append(
                f"participant {i} ended with balance {balance}, expected {expected}"
            )
        if p.wallet:
            violations.append(f"participant {i} ended with {len(p.wallet)} undeposited credits")
    metrics = server.storage_metrics()
    if metrics.request_entries or metrics.report_entries or metrics.credit_entries:
        violations.append("ledgers not empty after completion and expiry")
    violations.extend(check_privacy(participants, log))

    lines = log.lines()
    transcript_hash = hashlib.sha256("\n".join(lines).encode()).hexdigest()
    return TranscriptBundle(
        scenario=scenario,
        seed=seed,
        final_tick=clock.now,
        transcript_hash=transcript_hash,
        lines=lines,
        balances={lab: server.balance(lab.encode()) for lab in labels},
        granted=dict(granted),
        wallet_peaks={labels[i]: participants[i].wallet_peak for i in range(n)},
        deposited={labels[i]: participants[i].deposited for i in range(n)},
        storage=metrics,
        comm={
            "messages": log.message_count,
            "to_server_bytes": log.to_server_bytes,
            "from_server_bytes": log.from_server_bytes,
        },
        violations=violations,
        attack_results=driver.results(),
        server=server,
        participants=participants,
        log=log,
    )
