import pytest
from hypothesis import given
from hypothesis import strategies as st

from psncredit.errors import MalformedMessage
from psncredit.messages import (
    CompleteTask,
    CreditDeposit,
    DepositReceipt,
    ErrorResponse,
    ExpireWindow,
    IdentityGrant,
    IdentityRequest,
    Ok,
    ReportGrant,
    ReportSubmit,
    TaskGrant,
    TaskRequest,
    TokenSignGrant,
    TokenSignRequest,
    message_from_bytes,
)
from psncredit.tokens import CreditToken, ReportToken, RequestToken, credit_preimage

PID = b"\x11" * 16
REQ = RequestToken(task_index=1, tau=b"\xaa" * 32, sig=7)
REP = ReportToken(task_index=1, batch_id=b"\xbb" * 32, sig=8)
CRED = CreditToken(preimage=credit_preimage(1, 0, b"\x09" * 32, 55), ticks=3, sig=9)

CASES = [
    IdentityRequest(rid=b"node-1"),
    IdentityGrant(rid_sig=123456789),
    TokenSignRequest(pseudonym=PID, task_index=4, blinded=987, kind=1),
    TokenSignGrant(sig=2**200),
    TaskRequest(pseudonym=PID, token=REQ),
    TaskGrant(task_index=1, c_max=10, query=b"where am i"),
    ReportSubmit(pseudonym=PID, token=REP, blinded=(1, 2, 3), ticks=42, ciphertext=b"\x01\x02"),
    ReportGrant(granted=2, sigs=(11, 22)),
    CreditDeposit(rid=b"node-1", token=CRED),
    DepositReceipt(balance=17),
    CompleteTask(task_index=3),
    ExpireWindow(window=0),
    Ok(),
    ErrorResponse(code="reused_request_token", detail="tau replayed"),
]


@pytest.mark.parametrize("msg", CASES, ids=lambda m: type(m).__name__)
def test_wire_roundtrip(msg):
    assert message_from_bytes(msg.to_bytes()) == msg


def test_unknown_tag_rejected():
    with pytest.raises(MalformedMessage):
        message_from_bytes(b"\x03" + b"anything")
    with pytest.raises(MalformedMessage):
        message_from_bytes(b"")


def test_truncation_rejected():
    for msg in CASES:
        raw = msg.to_bytes()
        if len(raw) < 2:
            continue
        with pytest.raises(MalformedMessage):
            message_from_bytes(raw[:-1])


def test_wrong_token_type_inside_message_rejected():
    # a deposit must carry a credit token, not a request token
    bad = CreditDeposit(rid=b"node-1", token=REQ)  # type: ignore[arg-type]
    with pytest.raises(MalformedMessage):
        message_from_bytes(bad.to_bytes())


@given(st.binary(max_size=200))
def test_fuzz_parse_never_crashes(raw):
    try:
        msg = message_from_bytes(raw)
    except MalformedMessage:
        return
    assert message_from_bytes(msg.to_bytes()) == msg
