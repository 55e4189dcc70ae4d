import random

import pytest

from psncredit.clock import SimClock
from psncredit.crypto import blind_sign_ts, fdh, rsa_verify, digest
from psncredit.errors import (
    BatchMismatch,
    DoubleDeposit,
    ExpiredTimestamp,
    IdentityMismatch,
    InvalidSignature,
    MalformedPreimage,
    MalformedRequest,
    ReusedReportToken,
    ReusedRequestToken,
    StaleTimestamp,
    TaskClosed,
    UnknownTask,
    WindowNotFinished,
    WindowStillOpen,
)
from psncredit.messages import CreditDeposit, ErrorResponse, ReportSubmit
from psncredit.participant import Participant
from psncredit.server import SensingServer, ServerConfig, storage_baseline, storage_bound
from psncredit.sim.bus import LocalLink
from psncredit.tokens import CreditToken, ReportToken, RequestToken

KEY_BITS = 128


def make_env(**config_kwargs):
    defaults = dict(tasks_per_window=2, c_min=1, c_max=3, horizon=500)
    defaults.update(config_kwargs)
    config = ServerConfig(**defaults)
    server = SensingServer.generate(config, KEY_BITS, random.Random(0xBEEF), exponent_bits=16)
    link = LocalLink(server, sender="sp0")
    participant = Participant(rid=b"node-0", link=link, secret_rng=random.Random(0x5EED))
    return server, link, participant


def run_task(server, participant, i):
    participant.request_task(i)
    grant = participant.submit_report(i)
    return grant


def test_happy_flow_and_ledger_release():
    server, _, p = make_env()
    run_task(server, p, 1)
    assert server.request_ledger.size == 1
    assert server.report_ledger.size == 1
    assert len(p.wallet) == server.config.granted_credits() == 3

    while p.wallet:
        p.deposit_one()
    assert server.balance(b"node-0") == 3
    assert server.credit_ledger.size == 3

    server.complete_task(1)
    assert server.request_ledger.size == 0
    assert server.report_ledger.size == 0
    # credit entries survive task completion; they guard the whole window
    assert server.credit_ledger.size == 3


def test_identity_grant_verifies():
    server, _, p = make_env()
    rid_sig = p.ensure_identity()
    assert rsa_verify(server.rsa.n, server.rsa.e, digest(b"node-0"), rid_sig)


def test_identity_rejects_empty_rid():
    server, _, _ = make_env()
    with pytest.raises(MalformedRequest):
        server.handle_identity(b"")


def test_token_sign_validates_inputs():
    server, _, _ = make_env()
    with pytest.raises(UnknownTask):
        server.handle_token_sign(b"p" * 16, 0, 2, 0x01)
    with pytest.raises(MalformedRequest):
        server.handle_token_sign(b"p" * 16, 1, 2, 0x03)  # credit tokens are never issued blind
    with pytest.raises(MalformedRequest):
        server.handle_token_sign(b"p" * 16, 1, 0, 0x01)
    with pytest.raises(MalformedRequest):
        server.handle_token_sign(b"p" * 16, 1, server.request_key.n, 0x01)


def test_request_token_reuse_rejected():
    server, _, p = make_env()
    token = p.obtain_request_token(1)
    server.handle_task_request(b"p1" * 8, token)
    with pytest.raises(ReusedRequestToken):
        server.handle_task_request(b"p2" * 8, token)


def test_request_token_bad_signature():
    server, _, _ = make_env()
    with pytest.raises(InvalidSignature):
        server.handle_task_request(b"p" * 16, RequestToken(task_index=1, tau=b"\x01" * 32, sig=2))


def test_task_bounds():
    server, _, _ = make_env()
    with pytest.raises(UnknownTask):
        server._check_task_open(0)
    server.complete_task(1)
    with pytest.raises(TaskClosed):
        server._check_task_open(1)


def test_report_reuse_wins_over_staleness():
    # replayed report must be reported as reuse even after its stamp went stale
    server, link, p = make_env(report_slack=2)
    p.request_task(1)
    p.submit_report(1)
    replay = None
    for entry in server.transcript:
        if entry.phase == "report":
            replay = entry.payload
    assert replay is not None
    server.clock.advance(10)  # stamp is now stale too
    resp = server.dispatch_bytes(replay)
    from psncredit.messages import message_from_bytes

    err = message_from_bytes(resp)
    assert isinstance(err, ErrorResponse)
    assert err.code == ReusedReportToken.code


def test_report_stale_stamp_rejected():
    server, link, p = make_env()

    class SkewedLink(LocalLink):
        def now(self):
            return super().now() + 3  # stamps land in the future

    skewed = Participant(
        rid=b"node-1",
        link=SkewedLink(server, sender="sp1"),
        secret_rng=random.Random(1),
    )
    server.clock.advance(5)
    skewed.request_task(1)
    with pytest.raises(StaleTimestamp):
        skewed.submit_report(1)


def test_report_batch_shape_checked_before_signature():
    server, _, _ = make_env()
    c_max = server.config.c_max
    with pytest.raises(BatchMismatch):
        server.handle_report(b"p" * 16, ReportToken(1, b"\x01" * 32, 1), [2], 0, b"")
    with pytest.raises(BatchMismatch):
        server.handle_report(b"p" * 16, ReportToken(1, b"\x01" * 32, 1), [0] * c_max, 0, b"")
    with pytest.raises(BatchMismatch):
        server.handle_report(b"p" * 16, ReportToken(1, b"\x01" * 32, 1), [2] * c_max, 0, b"")


def test_report_bad_signature():
    from psncredit.tokens import batch_identifier

    server, _, _ = make_env()
    c_max = server.config.c_max
    blinded = [2, 3, 4][:c_max]
    token = ReportToken(1, batch_identifier(blinded, 1, c_max), sig=99)
    with pytest.raises(InvalidSignature):
        server.handle_report(b"p" * 16, token, blinded, 0, b"")


def test_deposit_rejections():
    server, _, p = make_env()
    run_task(server, p, 1)
    token = p.wallet[0]

    # wrong identity
    with pytest.raises(IdentityMismatch):
        server.handle_deposit(b"someone-else", token)
    # right identity works once
    server.handle_deposit(b"node-0", token)
    with pytest.raises(DoubleDeposit):
        server.handle_deposit(b"node-0", token)
    # garbage signature
    bad = CreditToken(preimage=token.preimage, ticks=token.ticks, sig=7)
    with pytest.raises(InvalidSignature):
        server.handle_deposit(b"node-0", bad)


def test_deposit_malformed_preimage_still_needs_valid_signature():
    # a well-signed but unparseable preimage is rejected after the signature
    # check, exercising the parse step on its own
    server, _, _ = make_env()
    pre = b"not a preimage"
    mu = fdh(pre, server.rsa.n)
    sig = blind_sign_ts(server.rsa, mu, ticks=0)
    with pytest.raises(MalformedPreimage):
        server.handle_deposit(b"node-0", CreditToken(preimage=pre, ticks=0, sig=sig))


def test_expire_window_ordering_and_replay_wall():
    server, _, p = make_env()
    run_task(server, p, 1)
    run_task(server, p, 2)
    keep = p.wallet[0]
    while p.wallet:
        p.deposit_one()

    with pytest.raises(WindowStillOpen):
        server.expire_window(0)
    server.clock.advance_to(server.config.horizon)
    with pytest.raises(WindowNotFinished):
        server.expire_window(0)
    server.complete_task(1)
    server.complete_task(2)
    server.expire_window(0)
    assert server.credit_ledger.size == 0  # ledger drained at expiry

    # replaying a deposited credit after expiry hits the window wall, not the ledger
    with pytest.raises(ExpiredTimestamp):
        server.handle_deposit(b"node-0", keep)
    with pytest.raises(MalformedRequest):
        server.expire_window(0)  # cannot expire twice
    with pytest.raises(MalformedRequest):
        server.expire_window(-1)


def test_task_request_after_expiry_closed():
    server, _, p = make_env(tasks_per_window=1)
    run_task(server, p, 1)
    server.complete_task(1)
    server.clock.advance_to(server.config.horizon)
    server.expire_window(0)
    token = p.obtain_request_token(2)  # next window still fine
    server.handle_task_request(b"p" * 16, token)
    with pytest.raises(TaskClosed):
        server.handle_task_request(
            b"q" * 16, RequestToken(task_index=1, tau=b"\x01" * 32, sig=1)
        )


def test_fault_hook_credit_ledger_off_allows_double_deposit():
    server, _, p = make_env(disable_credit_ledger=True)
    run_task(server, p, 1)
    token = p.wallet[0]
    server.handle_deposit(b"node-0", token)
    server.handle_deposit(b"node-0", token)  # no ledger, no defense
    assert server.balance(b"node-0") == 2


def test_fault_hook_identity_binding_off_allows_theft():
    server, _, p = make_env(disable_identity_binding=True)
    run_task(server, p, 1)
    server.handle_deposit(b"thief", p.wallet[0])
    assert server.balance(b"thief") == 1


def test_storage_formulas():
    assert storage_bound(1, 10) == 12
    assert storage_bound(4, 5) == 28
    assert storage_baseline(1, 10) == 21
    assert storage_baseline(4, 5) == 44


def test_storage_metrics_progression():
    server, _, p = make_env(tasks_per_window=2, c_max=3)
    for i in (1, 2):
        run_task(server, p, i)
        while p.wallet:
            p.deposit_one()
    m = server.storage_metrics()
    assert m.peak_total <= m.bound
    assert m.bound == storage_bound(2, 3)
    assert m.baseline == storage_baseline(2, 3)


def test_dispatch_wraps_rejections():
    server, _, _ = make_env()
    resp = server.dispatch(CreditDeposit(rid=b"x", token=CreditToken(b"\x00" * 36, 0, 1)))
    assert isinstance(resp, ErrorResponse)
    assert resp.code == InvalidSignature.code


def test_dispatch_bytes_handles_garbage():
    from psncredit.messages import message_from_bytes

    server, _, _ = make_env()
    resp = message_from_bytes(server.dispatch_bytes(b"\xff\xff"))
    assert isinstance(resp, ErrorResponse)
    assert resp.code == MalformedRequest.code


def test_rejected_attempts_still_recorded():
    server, _, _ = make_env()
    before = len(server.transcript)
    with pytest.raises(InvalidSignature):
        server.handle_task_request(b"p" * 16, RequestToken(1, b"\x02" * 32, sig=3))
    assert len(server.transcript) == before + 1


def test_config_validation():
    with pytest.raises(ValueError):
        ServerConfig(tasks_per_window=0)
    with pytest.raises(ValueError):
        ServerConfig(c_min=0)
    with pytest.raises(ValueError):
        ServerConfig(c_min=5, c_max=4)
    with pytest.raises(ValueError):
        ServerConfig(horizon=0)
    assert ServerConfig(policy_c=99, c_max=10).granted_credits() == 10
    assert ServerConfig(policy_c=0, c_min=2, c_max=10).granted_credits() == 2
    assert ServerConfig(c_max=7).granted_credits() == 7
